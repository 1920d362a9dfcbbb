#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "schelling/harness.hpp"
#include "schelling/io.hpp"

namespace {

// --config is resolved before CLI11 runs so that file values become the
// defaults and explicit flags override them.
std::string prescan_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

void add_common(CLI::App* sub, schelling::ExperimentConfig& cfg, std::string& cfg_path) {
  sub->add_option("--config", cfg_path, "experiment config JSON");
  sub->add_option("--out", cfg.out_dir, "output directory");
  sub->add_option("--seed", cfg.seed, "master seed");
  sub->add_option("--threads", cfg.threads, "worker threads (0 = SCHELLING_THREADS, then hardware)");
}

// Help stays long-only so the short -h slot is free for the grid side.
CLI::App* mode_cmd(CLI::App& parent, const char* name, const char* desc) {
  CLI::App* sub = parent.add_subcommand(name, desc);
  sub->set_help_flag("--help", "print help and exit");
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  schelling::ExperimentConfig cfg;
  const std::string preload = prescan_config(argc, argv);
  try {
    if (!preload.empty())
      cfg = schelling::ExperimentConfig::from_json(
          nlohmann::json::parse(schelling::read_text_file(preload)));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }

  CLI::App app{"event-driven flip dynamics: simulation, region analysis, passage times"};
  app.set_help_flag("--help", "print help and exit");
  app.require_subcommand(1);
  std::string cfg_path;

  CLI::App* sim = mode_cmd(app, "simulate", "run the dynamics and export artifacts");
  add_common(sim, cfg, cfg_path);
  sim->add_option("--h", cfg.h, "grid side");
  sim->add_option("--w", cfg.w, "neighborhood radius");
  sim->add_option("--tau", cfg.tau_tilde, "intolerance before quantization");
  sim->add_option("--p-theta", cfg.p_theta, "initial theta probability");
  sim->add_option("--boundary", cfg.boundary, "torus or open");
  sim->add_option("--dist", cfg.distribution, "exponential, uniform, or shifted_gamma");
  sim->add_option("--rate", cfg.dist_rate, "exponential rate");
  sim->add_option("--horizon", cfg.horizon, "stop at this time (<=0: run to final)");
  sim->add_option("--max-flips", cfg.max_flips, "flip budget (<0: Lyapunov bound)");
  sim->add_option("--frames", cfg.frame_times, "frame times for PGM export");

  CLI::App* ana = mode_cmd(app, "analyze", "region structure of a snapshot");
  add_common(ana, cfg, cfg_path);
  ana->add_option("--in", cfg.snapshot_in, "input snapshot (SCHL1)")->required();
  ana->add_option("--m", cfg.block_m, "block size m (0: N)");
  ana->add_option("--eps", cfg.epsilon, "block balance exponent offset");
  ana->add_option("--epsp", cfg.epsilon_prime, "region scale factor");
  ana->add_flag("--scan", cfg.scan_regions, "scan for nearest radical/expandable regions");

  CLI::App* shp = mode_cmd(app, "shape", "modified-model passage experiments");
  add_common(shp, cfg, cfg_path);
  shp->add_option("--h", cfg.h, "window side");
  shp->add_option("--w", cfg.w, "neighborhood radius");
  shp->add_option("--tau", cfg.tau_tilde, "intolerance before quantization");
  shp->add_option("--window", cfg.shape_window, "window side (0: --h)");
  shp->add_option("--replicas", cfg.replicas, "replica count");
  shp->add_option("--dots", cfg.dots, "defect flips per proposal");
  shp->add_flag("--resample", cfg.resample_grid, "fresh accepted window per replica");
  shp->add_option("--targets", cfg.targets, "node ids for concentration stats");
  shp->add_option("--sectors", cfg.sectors, "angular sectors");
  shp->add_option("--shape-t", cfg.shape_t, "level-set time (0: horizon/2)");
  shp->add_option("--horizon", cfg.horizon, "run horizon (<=0: 5x oracle span)");
  shp->add_option("--frames", cfg.frame_times, "level-set frame times");

  CLI::App* thy = mode_cmd(app, "theory", "closed-form quantities");
  add_common(thy, cfg, cfg_path);
  thy->add_option("--tau", cfg.tau_tilde, "intolerance before quantization");
  thy->add_option("--w", cfg.w, "neighborhood radius");
  thy->add_option("--eps", cfg.epsilon, "epsilon");
  thy->add_option("--epsp", cfg.epsilon_prime, "epsilon prime");
  thy->add_option("--curve", cfg.curve, "emit a curve CSV (supported: a,b)");
  thy->add_option("--grid", cfg.grid_points, "curve grid points");

  CLI::App* ver = mode_cmd(app, "verify", "acceptance criteria suite");
  add_common(ver, cfg, cfg_path);
  ver->add_option("--only", cfg.verify_only, "filter by id or family name");

  CLI::App* swp = mode_cmd(app, "sweep", "grid of (tau, seed) cells");
  add_common(swp, cfg, cfg_path);
  swp->add_option("--h", cfg.h, "grid side");
  swp->add_option("--w", cfg.w, "neighborhood radius");
  swp->add_option("--taus", cfg.sweep_taus, "tau values");
  swp->add_option("--seeds", cfg.sweep_seeds, "seeds per tau");

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) cfg.mode = "simulate";
  if (ana->parsed()) cfg.mode = "analyze";
  if (shp->parsed()) cfg.mode = "shape";
  if (thy->parsed()) cfg.mode = "theory";
  if (ver->parsed()) cfg.mode = "verify";
  if (swp->parsed()) cfg.mode = "sweep";

  try {
    return schelling::run_mode(cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
