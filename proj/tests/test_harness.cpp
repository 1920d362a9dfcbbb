#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "schelling/harness.hpp"
#include "schelling/io.hpp"
#include "schelling/lattice.hpp"

using namespace schelling;
namespace fs = std::filesystem;

namespace {

std::string scratch(const char* leaf) {
  const fs::path p = fs::temp_directory_path() / "schelling-harness-tests" / leaf;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("configs round trip through json") {
  ExperimentConfig cfg;
  cfg.mode = "shape";
  cfg.h = 96;
  cfg.w = 2;
  cfg.tau_tilde = 0.37;
  cfg.seed = 0xdeadbeefULL;
  cfg.boundary = "open";
  cfg.distribution = "uniform";
  cfg.dist_a = 0.25;
  cfg.dist_b = 2.0;
  cfg.frame_times = {0.5, 1.0, 2.5};
  cfg.targets = {17, 99};
  cfg.sweep_taus = {0.4, 0.45};
  cfg.sweep_seeds = {3, 4, 5};
  cfg.out_dir = "somewhere";

  const nlohmann::json j1 = cfg.to_json();
  const ExperimentConfig back = ExperimentConfig::from_json(j1);
  const nlohmann::json j2 = back.to_json();
  CHECK(j1.dump() == j2.dump());
  CHECK(back.seed == cfg.seed);
  CHECK(back.frame_times == cfg.frame_times);
  CHECK(back.targets == cfg.targets);

  // unknown keys are ignored, missing keys fall back to defaults
  nlohmann::json extra = j1;
  extra["note"] = "from the future";
  CHECK(ExperimentConfig::from_json(extra).h == 96);
  CHECK(ExperimentConfig::from_json(nlohmann::json::object()).h ==
        ExperimentConfig{}.h);

  const Params p = back.grid_params();
  CHECK(p.h == 96);
  CHECK(p.boundary == Boundary::open);
  CHECK(p.tauN == tau_quantize(0.37, 25));
  const WaitingTimeDist d = back.waiting_dist();
  CHECK(d.kind == WaitingTimeDist::Kind::uniform);
  CHECK(d.a == 0.25);

  ExperimentConfig bad = cfg;
  bad.boundary = "moebius";
  CHECK_THROWS_AS(bad.grid_params(), std::invalid_argument);
  bad = cfg;
  bad.distribution = "cauchy";
  CHECK_THROWS_AS(bad.waiting_dist(), std::invalid_argument);
}

TEST_CASE("sweeps are deterministic across thread counts") {
  ExperimentConfig cfg;
  cfg.h = 32;
  cfg.w = 2;
  cfg.sweep_taus = {0.42, 0.48};
  cfg.sweep_seeds = {1, 2};

  const std::string serial = sweep_csv(cfg, 1);
  const std::string parallel = sweep_csv(cfg, 3);
  CHECK(drop_runtime_column(serial) == drop_runtime_column(parallel));
  CHECK(count_lines(serial) == 5);  // header + 2x2 cells
  CHECK(serial.rfind("tau_tilde,seed,flips,m_mean,m_max,runtime_ms", 0) == 0);

  ExperimentConfig empty = cfg;
  empty.sweep_taus.clear();
  const std::string none = sweep_csv(empty, 2);
  CHECK(count_lines(none) == 1);
}

TEST_CASE("the runtime column strips cleanly") {
  CHECK(drop_runtime_column("a,b,c\nx,y,z\n") == "a,b\nx,y\n");
  CHECK(drop_runtime_column("h1,h2\n") == "h1\n");
}

TEST_CASE("a simulation reruns bit for bit from its manifest") {
  ExperimentConfig cfg;
  cfg.mode = "simulate";
  cfg.h = 24;
  cfg.w = 2;
  cfg.tau_tilde = 0.45;
  cfg.seed = 9;
  cfg.frame_times = {0.2, 0.8};
  cfg.out_dir = scratch("sim-a");
  REQUIRE(cmd_simulate(cfg) == 0);

  for (const char* leaf : {"manifest.json", "final.schl", "flips.csv",
                           "report.json", "m_histogram.csv", "frame_000.pgm",
                           "frame_001.pgm"})
    CHECK(fs::exists(fs::path(cfg.out_dir) / leaf));

  CHECK(read_pgm_dims((fs::path(cfg.out_dir) / "frame_000.pgm").string()) ==
        std::make_pair(24, 24));

  const nlohmann::json manifest =
      nlohmann::json::parse(read_text_file((fs::path(cfg.out_dir) / "manifest.json").string()));
  CHECK(manifest.at("code_version") == kCodeVersion);
  CHECK(manifest.at("config") == cfg.to_json());
  CHECK(manifest.at("seeds").size() >= 2);  // grid and clock streams

  const nlohmann::json report =
      nlohmann::json::parse(read_text_file((fs::path(cfg.out_dir) / "report.json").string()));
  CHECK(report.at("terminated") == true);
  const std::string flips = read_text_file((fs::path(cfg.out_dir) / "flips.csv").string());
  CHECK(count_lines(flips) == std::size_t(std::int64_t(report.at("flips"))) + 1);

  // the final grid equals the flip log replayed over the initial state
  TorusGrid replay = new_random(cfg.grid_params(), cfg.seed);
  NeighborhoodCounts cnt = build_counts(replay);
  std::size_t pos = flips.find('\n') + 1;
  while (pos < flips.size()) {
    const std::size_t c1 = flips.find(',', pos);
    const std::size_t c2 = flips.find(',', c1 + 1);
    const std::int64_t r = std::strtoll(flips.c_str() + c1 + 1, nullptr, 10);
    const std::int64_t c = std::strtoll(flips.c_str() + c2 + 1, nullptr, 10);
    apply_flip(replay, cnt, r * 24 + c);
    pos = flips.find('\n', pos) + 1;
  }
  const TorusGrid fin =
      load_snapshot((fs::path(cfg.out_dir) / "final.schl").string(), Boundary::torus);
  CHECK(fin == replay);

  ExperimentConfig again = ExperimentConfig::from_json(manifest.at("config"));
  again.out_dir = scratch("sim-b");
  REQUIRE(cmd_simulate(again) == 0);
  for (const char* leaf : {"final.schl", "flips.csv", "report.json"})
    CHECK(read_text_file((fs::path(cfg.out_dir) / leaf).string()) ==
          read_text_file((fs::path(again.out_dir) / leaf).string()));
}

TEST_CASE("a unanimous grid simulates to zero flips") {
  ExperimentConfig cfg;
  cfg.h = 16;
  cfg.w = 2;
  cfg.p_theta = 1.0;
  cfg.out_dir = scratch("sim-flat");
  REQUIRE(cmd_simulate(cfg) == 0);
  const nlohmann::json report =
      nlohmann::json::parse(read_text_file((fs::path(cfg.out_dir) / "report.json").string()));
  CHECK(report.at("flips") == 0);
  CHECK(report.at("terminated") == true);
}

TEST_CASE("analysis artifacts") {
  ExperimentConfig sim;
  sim.h = 40;
  sim.w = 2;
  sim.tau_tilde = 0.45;
  sim.seed = 4;
  sim.out_dir = scratch("ana-src");
  REQUIRE(cmd_simulate(sim) == 0);

  ExperimentConfig ana;
  ana.mode = "analyze";
  ana.h = 40;
  ana.w = 2;
  ana.tau_tilde = 0.45;
  ana.snapshot_in = (fs::path(sim.out_dir) / "final.schl").string();
  ana.out_dir = scratch("ana-out");
  REQUIRE(cmd_analyze(ana) == 0);

  CHECK(fs::exists(fs::path(ana.out_dir) / "clusters.jsonl"));
  CHECK(fs::exists(fs::path(ana.out_dir) / "m_histogram.csv"));
  // block side for m = N = 25 on h = 40: one 25-cell block per axis
  CHECK(read_pgm_dims((fs::path(ana.out_dir) / "blockmap.pgm").string()) ==
        std::make_pair(1, 1));

  const std::string hist =
      read_text_file((fs::path(ana.out_dir) / "m_histogram.csv").string());
  CHECK(hist.rfind("M,count", 0) == 0);
  CHECK(count_lines(hist) >= 2);

  ExperimentConfig broken = ana;
  broken.snapshot_in = (fs::path(ana.out_dir) / "garbage.schl").string();
  write_text_file(broken.snapshot_in, "not a snapshot at all");
  CHECK_THROWS(cmd_analyze(broken));
}

TEST_CASE("shape pipeline smoke") {
  ExperimentConfig cfg;
  cfg.mode = "shape";
  cfg.w = 2;
  cfg.tau_tilde = 0.45;
  cfg.shape_window = 36;
  cfg.replicas = 2;
  cfg.dots = 2;
  cfg.seed = 33;
  cfg.horizon = 25.0;
  cfg.shape_t = 10.0;
  cfg.sectors = 32;
  cfg.frame_times = {5.0};
  cfg.out_dir = scratch("shape-out");
  REQUIRE(cmd_shape(cfg) == 0);

  for (const char* leaf : {"manifest.json", "acceptance.csv", "shape.json",
                           "arrivals_0.arrv", "arrivals_0.csv", "arrivals_1.arrv",
                           "level_000.pgm"})
    CHECK(fs::exists(fs::path(cfg.out_dir) / leaf));

  const ArrivalField f =
      load_arrivals((fs::path(cfg.out_dir) / "arrivals_0.arrv").string());
  CHECK(f.rows == 36);
  CHECK(f.cols == 36);

  const nlohmann::json shape =
      nlohmann::json::parse(read_text_file((fs::path(cfg.out_dir) / "shape.json").string()));
  CHECK(shape.at("horizon") == 25.0);
  CHECK(shape.at("replicas").size() == 2);

  // the automatic horizon comes from the renormalized bound
  ExperimentConfig autoh = cfg;
  autoh.replicas = 1;
  autoh.horizon = 0.0;
  autoh.frame_times.clear();
  autoh.out_dir = scratch("shape-auto");
  REQUIRE(cmd_shape(autoh) == 0);
  const nlohmann::json shape2 =
      nlohmann::json::parse(read_text_file((fs::path(autoh.out_dir) / "shape.json").string()));
  CHECK(double(shape2.at("horizon")) > 0.0);
}

TEST_CASE("theory artifacts") {
  ExperimentConfig cfg;
  cfg.mode = "theory";
  cfg.w = 3;
  cfg.tau_tilde = 0.42;
  cfg.curve = "a,b";
  cfg.grid_points = 40;
  cfg.out_dir = scratch("theory-out");
  REQUIRE(cmd_theory(cfg) == 0);

  const nlohmann::json t =
      nlohmann::json::parse(read_text_file((fs::path(cfg.out_dir) / "theory.json").string()));
  CHECK(t.at("inputs").at("tauN") == tau_quantize(0.42, 49));
  const std::string curve =
      read_text_file((fs::path(cfg.out_dir) / "curve.csv").string());
  CHECK(count_lines(curve) == 41);

  ExperimentConfig bad = cfg;
  bad.curve = "bogus";
  bad.out_dir = scratch("theory-bad");
  CHECK_THROWS_AS(cmd_theory(bad), std::invalid_argument);
}

TEST_CASE("thread selection") {
  const char* saved = std::getenv("SCHELLING_THREADS");
  const std::string keep = saved ? saved : "";

  CHECK(effective_threads(2) == 2);
  setenv("SCHELLING_THREADS", "3", 1);
  CHECK(effective_threads(0) == 3);
  CHECK(effective_threads(5) == 5);  // explicit request wins
  setenv("SCHELLING_THREADS", "banana", 1);
  CHECK(effective_threads(0) >= 1);
  unsetenv("SCHELLING_THREADS");
  CHECK(effective_threads(0) >= 1);

  if (saved) setenv("SCHELLING_THREADS", keep.c_str(), 1);
}

TEST_CASE("mode dispatch") {
  ExperimentConfig cfg;
  cfg.mode = "transmogrify";
  CHECK_THROWS_AS(run_mode(cfg), std::invalid_argument);

  ExperimentConfig verify;
  verify.mode = "verify";
  verify.verify_only = "no-such-criterion-zzz";
  verify.out_dir = scratch("verify-dispatch");
  CHECK(run_mode(verify) == 1);
  CHECK(fs::exists(fs::path(verify.out_dir) / "manifest.json"));
}

}  // TEST_SUITE
