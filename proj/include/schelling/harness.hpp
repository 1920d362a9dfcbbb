#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "schelling/lattice.hpp"
#include "schelling/rng.hpp"

namespace schelling {

inline constexpr char kCodeVersion[] = "0.1.0";

// One experiment, fully described. Serializes to JSON with sorted keys and
// round-trips bit-exactly; unknown keys are ignored on load so configs stay
// forward compatible.
struct ExperimentConfig {
  std::string mode = "simulate";

  // grid
  std::int32_t h = 128;
  std::int32_t w = 3;
  double tau_tilde = 0.42;
  double p_theta = 0.5;
  std::uint64_t seed = 1;
  std::string boundary = "torus";

  // dynamics
  std::string distribution = "exponential";
  double dist_rate = 1.0;
  double dist_a = 0.5, dist_b = 1.5;
  double dist_shape = 2.0, dist_scale = 1.0, dist_shift = 0.0;
  double dist_truncate = 0.0;
  double horizon = 0.0;  // <= 0: run to the final configuration
  std::int64_t max_flips = -1;
  std::vector<double> frame_times;

  // analysis
  std::string snapshot_in;
  std::int32_t block_m = 0;  // 0: use N
  double epsilon = 0.25;
  double epsilon_prime = 0.25;
  bool scan_regions = false;
  bool m_histogram = true;

  // shape
  std::int32_t shape_window = 0;  // 0: reuse h
  std::int32_t replicas = 1;
  std::int32_t dots = 3;
  bool resample_grid = false;  // fresh accepted window per replica
  std::vector<std::int64_t> targets;
  std::int32_t sectors = 64;
  double shape_t = 0.0;  // 0: horizon / 2

  // theory
  std::string curve;  // "a,b" emits the exponent curve CSV
  std::int32_t grid_points = 1000;

  // sweep
  std::vector<double> sweep_taus;
  std::vector<std::uint64_t> sweep_seeds;

  // common
  std::string out_dir = "out";
  std::int32_t threads = 0;  // 0: environment default, then hardware
  std::string verify_only;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);

  Params grid_params() const;
  WaitingTimeDist waiting_dist() const;
};

// Seeds actually consumed by a run, by stream name, in consumption order.
struct RunManifest {
  ExperimentConfig config;
  std::string code_version = kCodeVersion;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;

  nlohmann::json to_json() const;
};

int effective_threads(std::int32_t requested);

// Subcommand bodies. Each writes its artifacts plus manifest.json under
// config.out_dir and returns a process exit code.
int cmd_simulate(const ExperimentConfig& cfg);
int cmd_analyze(const ExperimentConfig& cfg);
int cmd_shape(const ExperimentConfig& cfg);
int cmd_theory(const ExperimentConfig& cfg);
int cmd_sweep(const ExperimentConfig& cfg);
int cmd_verify(const ExperimentConfig& cfg);
int run_mode(const ExperimentConfig& cfg);

// Sweep CSV body; exposed so tests can compare a parallel and a serial run
// directly (identical up to the runtime_ms column).
std::string sweep_csv(const ExperimentConfig& cfg, int threads);

// Strips the trailing runtime_ms column from every row; for comparisons.
std::string drop_runtime_column(const std::string& csv);

}  // namespace schelling
