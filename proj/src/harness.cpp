#include "schelling/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <stdexcept>
#include <thread>

#include "schelling/dynamics.hpp"
#include "schelling/io.hpp"
#include "schelling/passage.hpp"
#include "schelling/regions.hpp"
#include "schelling/theory.hpp"
#include "schelling/verify.hpp"

namespace schelling {

namespace fs = std::filesystem;

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["mode"] = mode;
  j["h"] = h;
  j["w"] = w;
  j["tau_tilde"] = tau_tilde;
  j["p_theta"] = p_theta;
  j["seed"] = seed;
  j["boundary"] = boundary;
  j["distribution"] = distribution;
  j["dist_rate"] = dist_rate;
  j["dist_a"] = dist_a;
  j["dist_b"] = dist_b;
  j["dist_shape"] = dist_shape;
  j["dist_scale"] = dist_scale;
  j["dist_shift"] = dist_shift;
  j["dist_truncate"] = dist_truncate;
  j["horizon"] = horizon;
  j["max_flips"] = max_flips;
  j["frame_times"] = frame_times;
  j["snapshot_in"] = snapshot_in;
  j["block_m"] = block_m;
  j["epsilon"] = epsilon;
  j["epsilon_prime"] = epsilon_prime;
  j["scan_regions"] = scan_regions;
  j["m_histogram"] = m_histogram;
  j["shape_window"] = shape_window;
  j["replicas"] = replicas;
  j["dots"] = dots;
  j["resample_grid"] = resample_grid;
  j["targets"] = targets;
  j["sectors"] = sectors;
  j["shape_t"] = shape_t;
  j["curve"] = curve;
  j["grid_points"] = grid_points;
  j["sweep_taus"] = sweep_taus;
  j["sweep_seeds"] = sweep_seeds;
  j["out_dir"] = out_dir;
  j["threads"] = threads;
  j["verify_only"] = verify_only;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.mode = j.value("mode", c.mode);
  c.h = j.value("h", c.h);
  c.w = j.value("w", c.w);
  c.tau_tilde = j.value("tau_tilde", c.tau_tilde);
  c.p_theta = j.value("p_theta", c.p_theta);
  c.seed = j.value("seed", c.seed);
  c.boundary = j.value("boundary", c.boundary);
  c.distribution = j.value("distribution", c.distribution);
  c.dist_rate = j.value("dist_rate", c.dist_rate);
  c.dist_a = j.value("dist_a", c.dist_a);
  c.dist_b = j.value("dist_b", c.dist_b);
  c.dist_shape = j.value("dist_shape", c.dist_shape);
  c.dist_scale = j.value("dist_scale", c.dist_scale);
  c.dist_shift = j.value("dist_shift", c.dist_shift);
  c.dist_truncate = j.value("dist_truncate", c.dist_truncate);
  c.horizon = j.value("horizon", c.horizon);
  c.max_flips = j.value("max_flips", c.max_flips);
  c.frame_times = j.value("frame_times", c.frame_times);
  c.snapshot_in = j.value("snapshot_in", c.snapshot_in);
  c.block_m = j.value("block_m", c.block_m);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.epsilon_prime = j.value("epsilon_prime", c.epsilon_prime);
  c.scan_regions = j.value("scan_regions", c.scan_regions);
  c.m_histogram = j.value("m_histogram", c.m_histogram);
  c.shape_window = j.value("shape_window", c.shape_window);
  c.replicas = j.value("replicas", c.replicas);
  c.dots = j.value("dots", c.dots);
  c.resample_grid = j.value("resample_grid", c.resample_grid);
  c.targets = j.value("targets", c.targets);
  c.sectors = j.value("sectors", c.sectors);
  c.shape_t = j.value("shape_t", c.shape_t);
  c.curve = j.value("curve", c.curve);
  c.grid_points = j.value("grid_points", c.grid_points);
  c.sweep_taus = j.value("sweep_taus", c.sweep_taus);
  c.sweep_seeds = j.value("sweep_seeds", c.sweep_seeds);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.threads = j.value("threads", c.threads);
  c.verify_only = j.value("verify_only", c.verify_only);
  return c;
}

Params ExperimentConfig::grid_params() const {
  Boundary b;
  if (boundary == "torus")
    b = Boundary::torus;
  else if (boundary == "open")
    b = Boundary::open;
  else
    throw std::invalid_argument("boundary must be torus or open");
  const std::int32_t N = (2 * w + 1) * (2 * w + 1);
  return Params(h, w, tau_quantize(tau_tilde, N), b);
}

WaitingTimeDist ExperimentConfig::waiting_dist() const {
  WaitingTimeDist d;
  if (distribution == "exponential")
    d = WaitingTimeDist::exponential(dist_rate);
  else if (distribution == "uniform")
    d = WaitingTimeDist::uniform(dist_a, dist_b);
  else if (distribution == "shifted_gamma")
    d = WaitingTimeDist::shifted_gamma(dist_shape, dist_scale, dist_shift);
  else
    throw std::invalid_argument("unknown distribution: " + distribution);
  d.truncate_at = dist_truncate;
  d.validate();
  return d;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["code_version"] = code_version;
  j["config"] = config.to_json();
  nlohmann::json s = nlohmann::json::array();
  for (const auto& [name, value] : seeds) s.push_back({{"stream", name}, {"seed", value}});
  j["seeds"] = s;
  return j;
}

int effective_threads(std::int32_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SCHELLING_THREADS")) {
    const int k = std::atoi(env);
    if (k > 0) return k;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? int(hw) : 1;
}

namespace {

// Creating the directory and writing the manifest up front doubles as the
// writability probe: a bad out_dir fails before any compute starts.
void write_manifest(const ExperimentConfig& cfg, const RunManifest& m) {
  fs::create_directories(cfg.out_dir);
  write_text_file((fs::path(cfg.out_dir) / "manifest.json").string(),
                  m.to_json().dump(2) + "\n");
}

std::string flip_log_csv(const std::vector<FlipRecord>& log, std::int32_t h) {
  std::string out = "time,node_row,node_col,new_state\n";
  for (const FlipRecord& f : log) {
    out += format_double(f.time);
    char tail[64];
    std::snprintf(tail, sizeof tail, ",%d,%d,%d\n", int(f.node / h), int(f.node % h),
                  f.new_state ? 1 : 0);
    out += tail;
  }
  return out;
}

std::string m_histogram_csv(const TorusGrid& g) {
  const MonoBallField mb = mono_ball_sizes(g);
  std::map<std::int64_t, std::int64_t> hist;
  for (std::int64_t u = 0; u < g.size(); ++u) ++hist[mb.size_at(u)];
  std::string out = "M,count\n";
  for (const auto& [m, count] : hist) {
    char line[64];
    std::snprintf(line, sizeof line, "%lld,%lld\n", (long long)m, (long long)count);
    out += line;
  }
  return out;
}

nlohmann::json report_json(const FinalReport& rep) {
  return nlohmann::json{{"final_time", rep.final_time},
                        {"flips", rep.flips},
                        {"terminated", rep.terminated},
                        {"lyapunov_start", rep.lyapunov_start},
                        {"lyapunov_end", rep.lyapunov_end}};
}

void emit_frames(const ExperimentConfig& cfg, const std::vector<FlipRecord>& log) {
  if (cfg.frame_times.empty()) return;
  std::vector<double> times = cfg.frame_times;
  std::sort(times.begin(), times.end());
  TorusGrid g = new_random(cfg.grid_params(), cfg.seed, cfg.p_theta);
  NeighborhoodCounts cnt = build_counts(g);
  std::size_t next = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    while (next < log.size() && log[next].time <= times[k])
      apply_flip(g, cnt, log[next++].node);
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.pgm", k);
    save_pgm(render_states(g, cnt), cfg.h, cfg.h, (fs::path(cfg.out_dir) / name).string());
  }
}

struct SweepCell {
  double tau;
  std::uint64_t seed;
};

std::string sweep_row(const ExperimentConfig& cfg, const SweepCell& cell) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig one = cfg;
  one.tau_tilde = cell.tau;
  TorusGrid g = new_random(one.grid_params(), cell.seed, cfg.p_theta);
  SimState sim = init_dynamics(g, cfg.waiting_dist(), cell.seed);
  const FinalReport rep = sim.run_to_final(cfg.max_flips);
  const MonoBallField mb = mono_ball_sizes(sim.grid());
  double mean = 0.0;
  std::int64_t mx = 0;
  for (std::int64_t u = 0; u < sim.grid().size(); ++u) {
    mean += double(mb.size_at(u));
    mx = std::max(mx, mb.size_at(u));
  }
  mean /= double(sim.grid().size());
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  std::string row = format_double(cell.tau);
  char tail[128];
  std::snprintf(tail, sizeof tail, ",%llu,%lld,", (unsigned long long)cell.seed,
                (long long)rep.flips);
  row += tail;
  row += format_double(mean);
  std::snprintf(tail, sizeof tail, ",%lld,%lld\n", (long long)mx, (long long)ms);
  row += tail;
  return row;
}

}  // namespace

std::string sweep_csv(const ExperimentConfig& cfg, int threads) {
  std::vector<SweepCell> cells;
  for (double tau : cfg.sweep_taus)
    for (std::uint64_t s : cfg.sweep_seeds) cells.push_back({tau, s});
  std::vector<std::string> rows(cells.size());
  const int T = std::max(1, std::min<int>(threads, int(cells.size() ? cells.size() : 1)));
  std::vector<std::thread> pool;
  for (int t = 0; t < T; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = std::size_t(t); i < cells.size(); i += std::size_t(T))
        rows[i] = sweep_row(cfg, cells[i]);
    });
  for (std::thread& th : pool) th.join();
  std::string out = "tau_tilde,seed,flips,m_mean,m_max,runtime_ms\n";
  for (const std::string& r : rows) out += r;
  return out;
}

std::string drop_runtime_column(const std::string& csv) {
  std::string out;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t eol = csv.find('\n', pos);
    if (eol == std::string::npos) eol = csv.size();
    const std::string line = csv.substr(pos, eol - pos);
    const std::size_t comma = line.rfind(',');
    out += comma == std::string::npos ? line : line.substr(0, comma);
    out += '\n';
    pos = eol + 1;
  }
  return out;
}

int cmd_simulate(const ExperimentConfig& cfg) {
  RunManifest man;
  man.config = cfg;
  man.seeds = {{"grid", cfg.seed}, {"clock", cfg.seed}};
  write_manifest(cfg, man);

  const Params p = cfg.grid_params();
  TorusGrid g = new_random(p, cfg.seed, cfg.p_theta);
  SimState sim = init_dynamics(g, cfg.waiting_dist(), cfg.seed);
  const std::int64_t lyap_start = sim.lyapunov();
  sim.set_record_flips(true);

  FinalReport rep;
  if (cfg.horizon > 0.0) {
    sim.run_until(cfg.horizon);
    rep.final_time = sim.now();
    rep.flips = sim.flips();
    rep.terminated = !sim.peek_next().has_value();
    rep.lyapunov_start = lyap_start;
    rep.lyapunov_end = sim.lyapunov();
  } else {
    rep = sim.run_to_final(cfg.max_flips);
  }

  const fs::path out(cfg.out_dir);
  save_snapshot(sim.grid(), (out / "final.schl").string());
  write_text_file((out / "flips.csv").string(), flip_log_csv(sim.flip_log(), p.h));
  write_text_file((out / "report.json").string(), report_json(rep).dump(2) + "\n");
  emit_frames(cfg, sim.flip_log());
  if (cfg.m_histogram)
    write_text_file((out / "m_histogram.csv").string(), m_histogram_csv(sim.grid()));
  return 0;
}

int cmd_analyze(const ExperimentConfig& cfg) {
  if (cfg.snapshot_in.empty())
    throw std::invalid_argument("analyze needs snapshot_in");
  const TorusGrid g = load_snapshot(cfg.snapshot_in, cfg.grid_params().boundary);

  RunManifest man;
  man.config = cfg;
  man.seeds = {{"snapshot_grid", g.seed()}};
  write_manifest(cfg, man);

  const fs::path out(cfg.out_dir);
  const std::int32_t m = cfg.block_m > 0 ? cfg.block_m : g.params().N();
  const BlockMap bm = classify_blocks(g, m, cfg.epsilon);
  save_blockmap_pgm(bm, (out / "blockmap.pgm").string());

  std::vector<RegionReport> reports;
  for (const BadCluster& cl : bad_clusters(bm)) {
    RegionReport r;
    r.kind = RegionKind::bad_block;
    r.center = std::int64_t(bm.center_row(cl.anchor.first)) * bm.h +
               bm.center_col(cl.anchor.second);
    r.radius_or_size = cl.radius;
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& [bi, bj] : cl.blocks) blocks.push_back({bi, bj});
    r.certificate = {{"blocks", blocks}, {"radius", cl.radius}};
    reports.push_back(std::move(r));
  }
  write_text_file((out / "clusters.jsonl").string(), region_report_lines(reports));

  if (cfg.scan_regions) {
    const std::int64_t center = std::int64_t(g.h() / 2) * g.h() + g.h() / 2;
    nlohmann::json scans;
    for (RegionKind kind : {RegionKind::radical, RegionKind::expandable}) {
      const auto hit = nearest_region_scan(g, kind, center, g.h(), cfg.epsilon,
                                           cfg.epsilon_prime);
      scans[region_kind_name(kind)] =
          hit ? nlohmann::json{{"node", hit->first}, {"distance", hit->second}}
              : nlohmann::json(nullptr);
    }
    write_text_file((out / "scans.json").string(), scans.dump(2) + "\n");
  }

  if (cfg.m_histogram)
    write_text_file((out / "m_histogram.csv").string(), m_histogram_csv(g));
  return 0;
}

int cmd_shape(const ExperimentConfig& cfg) {
  const std::int32_t L = cfg.shape_window > 0 ? cfg.shape_window : cfg.h;
  const std::int32_t N = (2 * cfg.w + 1) * (2 * cfg.w + 1);
  const Params pw(L, cfg.w, tau_quantize(cfg.tau_tilde, N), Boundary::open);
  if (cfg.replicas < 1) throw std::invalid_argument("need at least one replica");

  RunManifest man;
  man.config = cfg;
  man.seeds.emplace_back("sampler", cfg.seed);
  for (std::int32_t i = 0; i < cfg.replicas; ++i)
    man.seeds.emplace_back("clock_" + std::to_string(i),
                           derive_key(derive_key(cfg.seed, kReplicaStream), i));
  write_manifest(cfg, man);

  const fs::path out(cfg.out_dir);
  AcceptanceSampler sampler(pw, cfg.seed, cfg.dots);
  TorusGrid window = sampler.next();
  const std::int64_t center = std::int64_t(L / 2) * L + L / 2;
  const WaitingTimeDist dist = cfg.waiting_dist();

  std::vector<ArrivalField> fields;
  double horizon = cfg.horizon;
  nlohmann::json per_replica = nlohmann::json::array();
  for (std::int32_t i = 0; i < cfg.replicas; ++i) {
    if (cfg.resample_grid && i > 0) window = sampler.next();
    ModifiedSim msim(window, dist, derive_key(derive_key(cfg.seed, kReplicaStream), i));
    msim.seed_affected_block(center);
    if (horizon <= 0.0) {
      const RenormFPP rfpp = build_renorm_fpp(msim);
      double far = 0.0;
      for (std::int32_t bi = 0; bi < rfpp.nbi; ++bi)
        for (std::int32_t bj = 0; bj < rfpp.nbj; ++bj) {
          if (!rfpp.usable[std::size_t(bi) * rfpp.nbj + bj]) continue;
          const std::int64_t node =
              std::int64_t(rfpp.r0 + bi * rfpp.block_side + rfpp.block_side / 2) * L +
              rfpp.c0 + bj * rfpp.block_side + rfpp.block_side / 2;
          const double d = fpp_oracle_upper(rfpp, msim.seed_center(), node);
          if (std::isfinite(d)) far = std::max(far, d);
        }
      horizon = 5.0 * far;
    }
    const ArrivalField& f = msim.run_modified(horizon);
    fields.push_back(f);
    const std::string stem = "arrivals_" + std::to_string(i);
    save_arrivals(f, (out / (stem + ".arrv")).string());
    save_arrivals_csv(f, (out / (stem + ".csv")).string());
    if (i == 0) {
      std::vector<double> times = cfg.frame_times;
      std::sort(times.begin(), times.end());
      for (std::size_t k = 0; k < times.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "level_%03zu.pgm", k);
        save_pgm(level_set_pixels(f, times[k]), L, L, (out / name).string());
      }
    }
    const double t = cfg.shape_t > 0.0 ? cfg.shape_t : horizon / 2.0;
    per_replica.push_back(shape_stats_json(shape_stats(f, t, center, pw, cfg.sectors)));
  }

  nlohmann::json shape;
  shape["horizon"] = horizon;
  shape["replicas"] = per_replica;
  if (!cfg.targets.empty() && cfg.replicas >= 2) {
    nlohmann::json conc = nlohmann::json::array();
    for (const ConcentrationRow& row : concentration_stats(fields, cfg.targets, center))
      conc.push_back({{"target", row.target},
                      {"distance", row.distance},
                      {"finite_samples", row.finite_samples},
                      {"mean", row.mean},
                      {"stddev", row.stddev},
                      {"normalized", row.normalized}});
    shape["concentration"] = conc;
  }
  write_text_file((out / "shape.json").string(), shape.dump(2) + "\n");
  write_text_file((out / "acceptance.csv").string(), sampler.acceptance_log());
  return 0;
}

int cmd_theory(const ExperimentConfig& cfg) {
  RunManifest man;
  man.config = cfg;
  write_manifest(cfg, man);

  const fs::path out(cfg.out_dir);
  const nlohmann::json table =
      theory_table(cfg.tau_tilde, cfg.w, cfg.epsilon, cfg.epsilon_prime);
  write_text_file((out / "theory.json").string(), table.dump(2) + "\n");
  std::cout << table.dump(2) << "\n";
  if (!cfg.curve.empty()) {
    if (cfg.curve != "a,b")
      throw std::invalid_argument("unknown curve: " + cfg.curve);
    write_text_file((out / "curve.csv").string(), exponent_curve_csv(cfg.grid_points));
  }
  return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
  RunManifest man;
  man.config = cfg;
  for (double tau : cfg.sweep_taus)
    for (std::uint64_t s : cfg.sweep_seeds)
      man.seeds.emplace_back("cell_tau" + format_double(tau), s);
  write_manifest(cfg, man);

  const std::string csv = sweep_csv(cfg, effective_threads(cfg.threads));
  write_text_file((fs::path(cfg.out_dir) / "sweep.csv").string(), csv);
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg) {
  RunManifest man;
  man.config = cfg;
  write_manifest(cfg, man);
  return run_acceptance(cfg.verify_only);
}

int run_mode(const ExperimentConfig& cfg) {
  if (cfg.mode == "simulate") return cmd_simulate(cfg);
  if (cfg.mode == "analyze") return cmd_analyze(cfg);
  if (cfg.mode == "shape") return cmd_shape(cfg);
  if (cfg.mode == "theory") return cmd_theory(cfg);
  if (cfg.mode == "verify") return cmd_verify(cfg);
  if (cfg.mode == "sweep") return cmd_sweep(cfg);
  throw std::invalid_argument("unknown mode: " + cfg.mode);
}

}  // namespace schelling
