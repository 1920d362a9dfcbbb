#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "json.hpp"
#include "schelling/dynamics.hpp"
#include "schelling/io.hpp"
#include "schelling/lattice.hpp"
#include "schelling/rng.hpp"

namespace schelling {

// Single-flip dynamics on a finite open window. Differences from the
// original model: every particle carries one flipping time t_i drawn up
// front and flips at most once; a theta-particle on an affected* node flips
// at its t_i outright; any other particle is scheduled at onset + t_i the
// first time it turns p-stable and fires without revalidation. A band of
// width w along the window edge is frozen (its particles still count in
// neighborhoods but never flip), standing in for the far-away boundary of
// a much larger window.
class ModifiedSim {
 public:
  ModifiedSim(const TorusGrid& window, const WaitingTimeDist& dist,
              std::uint64_t clock_seed);

  // Marks the w-block at center affected* and schedules its theta-occupants
  // at their flipping times. Idempotent per node.
  void seed_affected_block(std::int64_t center);

  // Evolves to the horizon (inclusive); callable repeatedly with growing
  // horizons. Returns the arrival field: per node, the first time it was
  // theta-affected (0 on the seeded block, +inf if never).
  const ArrivalField& run_modified(double horizon);

  const TorusGrid& grid() const { return g_; }
  const NeighborhoodCounts& counts() const { return cnt_; }
  const ArrivalField& arrivals() const { return arrivals_; }
  const std::vector<FlipRecord>& flip_log() const { return log_; }
  double now() const { return now_; }
  double flip_time(std::int64_t u) const { return t_i_[std::size_t(u)]; }
  bool is_affected_star(std::int64_t u) const { return astar_[std::size_t(u)] != 0; }
  bool is_frozen(std::int64_t u) const { return frozen_[std::size_t(u)] != 0; }
  std::int64_t seed_center() const { return seed_center_; }

 private:
  void note_status_around(std::int64_t u);

  TorusGrid g_;
  NeighborhoodCounts cnt_;
  std::vector<double> t_i_;
  std::vector<std::uint8_t> astar_, flipped_, scheduled_, pstable_, frozen_;
  ArrivalField arrivals_;
  std::priority_queue<FlipEvent, std::vector<FlipEvent>,
                      bool (*)(const FlipEvent&, const FlipEvent&)>
      heap_;
  std::vector<FlipRecord> log_;
  double now_ = 0.0;
  std::int64_t seed_center_ = -1;
};

// w-block renormalization: the window is tiled with w-blocks aligned so the
// seed block is a tile; each block's weight is the sum of its particles'
// t_i. Only blocks clear of the frozen band (plus one cell, so that block
// to block corridors stay certified) enter the lattice.
struct RenormFPP {
  std::int32_t h = 0;
  std::int32_t block_side = 0;
  std::int32_t r0 = 0, c0 = 0;  // window coords of block (0,0)'s corner
  std::int32_t nbi = 0, nbj = 0;
  std::vector<double> weight;       // row-major blocks
  std::vector<std::uint8_t> usable; // inside the corridor-safe margin

  std::optional<std::pair<std::int32_t, std::int32_t>> block_of(std::int64_t u) const;
};

RenormFPP build_renorm_fpp(const ModifiedSim& sim);

// Node-weighted 4-adjacent shortest path between the blocks holding x and
// y, both endpoint weights included. +inf when either block is unusable.
// Couples with the same t_i draws, so on accepted windows it upper-bounds
// the modified-model passage time sample by sample.
double fpp_oracle_upper(const RenormFPP& rfpp, std::int64_t x, std::int64_t y);

// ---------------------------------------------------------------------------
// Initial-configuration conditioning

// True iff some window node is theta- or theta-bar-affected.
bool window_has_affected_node(const TorusGrid& g, const NeighborhoodCounts& cnt);

// Region-of-expansion over every w-block placement whose boundary ring stays
// at least w cells from the window edge (ring particles then see full
// neighborhoods, which is the regime the corridor argument uses).
bool window_is_region_of_expansion(const TorusGrid& g);

// Rejection sampler for the conditioned initial law, specialized to the
// checkerboard-with-defects ensemble: a random-phase checkerboard plus
// `dots` single-site flips at random positions. Within this family the
// acceptance predicate (no affected nodes, window region of expansion) is
// checked exactly; proposals failing it are counted and discarded.
class AcceptanceSampler {
 public:
  AcceptanceSampler(const Params& window, std::uint64_t seed, std::int32_t dots);

  TorusGrid next();  // samples proposals until one is accepted

  std::int64_t proposals() const { return proposals_; }
  std::int64_t accepted() const { return accepted_; }
  std::string acceptance_log() const;  // CSV: proposal,accepted

  static bool admissible(const TorusGrid& g, const NeighborhoodCounts& cnt);

 private:
  Params p_;
  std::uint64_t seed_;
  std::int32_t dots_;
  std::int64_t proposals_ = 0, accepted_ = 0;
  std::vector<std::uint8_t> outcomes_;
};

// ---------------------------------------------------------------------------
// Shape and concentration statistics

struct ShapeStats {
  double t = 0.0;
  std::int64_t level_set_size = 0;
  bool valid = false;  // nonempty and >= 2w clear of the window boundary
  std::vector<double> radial;        // sector max radius, K sectors
  std::vector<double> fitted_radii;  // radial / t
  double anisotropy = 0.0;           // (max - min) / mean over sectors
};

// Sector-max radial profile of the level set A(t) = {u : a(u) <= t} around
// origin_node, with K evenly spaced angular sectors.
ShapeStats shape_stats(const ArrivalField& f, double t, std::int64_t origin_node,
                       const Params& p, std::int32_t sectors = 64);

struct ConcentrationRow {
  std::int64_t target = -1;
  double distance = 0.0;  // l-infinity from the origin
  std::int64_t finite_samples = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double normalized = 0.0;  // stddev / sqrt(distance * ln distance)
  std::vector<double> samples;
};

std::vector<ConcentrationRow> concentration_stats(
    const std::vector<ArrivalField>& replicas, const std::vector<std::int64_t>& targets,
    std::int64_t origin_node);

// 255 where a(u) <= t, 0 elsewhere.
std::vector<std::uint8_t> level_set_pixels(const ArrivalField& f, double t);

nlohmann::json shape_stats_json(const ShapeStats& s);

}  // namespace schelling
