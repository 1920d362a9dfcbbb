#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "schelling/lattice.hpp"
#include "schelling/rng.hpp"

namespace schelling {

// One scheduled flip. Events are lazy: a node's epoch is bumped on every
// change of its p-stability status, so an event is acted on only if its
// epoch still matches the node's.
struct FlipEvent {
  double time = 0.0;
  std::int64_t node = 0;
  std::uint32_t epoch = 0;
};

struct FlipRecord {
  double time = 0.0;
  std::int64_t node = 0;
  bool new_state = false;
};

struct FinalReport {
  double final_time = 0.0;
  std::int64_t flips = 0;
  bool terminated = false;  // no p-stable particle left
  std::int64_t lyapunov_start = 0;
  std::int64_t lyapunov_end = 0;
};

// Event-driven run of the flip dynamics. A particle that becomes p-stable
// draws a fresh waiting time from its onset; if it is still p-stable when
// the clock rings, it flips (and is then stable, since flipping gives it
// cnt_in - k + 1 >= tauN matches). Ties in ring time break by node id.
class SimState {
 public:
  SimState() = default;

  const TorusGrid& grid() const { return g_; }
  const NeighborhoodCounts& counts() const { return cnt_; }
  const Params& params() const { return g_.params(); }
  double now() const { return t_; }
  std::int64_t flips() const { return flips_; }

  bool p_stable_flag(std::int64_t u) const { return pstable_[std::size_t(u)] != 0; }
  // Start of the current p-stability stretch (meaningful only while p-stable).
  double p_stable_since(std::int64_t u) const { return onset_[std::size_t(u)]; }
  std::int64_t p_stable_count() const { return pstable_count_; }

  // Sum of k(u) over the grid. Every flip raises it by 2(cnt_in + 1 - 2k),
  // at least 2, which bounds the number of flips and forces termination.
  std::int64_t lyapunov() const { return lyap_; }
  std::int64_t lyapunov_rebuild() const;

  // Next event that would fire, without executing it.
  std::optional<FlipEvent> peek_next();

  // Execute one flip. Returns the record, or nullopt once quiet.
  std::optional<FlipRecord> step();

  // Run until no event is left (or the flip budget runs out; the default
  // budget N*h^2 exceeds the Lyapunov bound, so hitting it means a bug).
  FinalReport run_to_final(std::int64_t max_flips = -1);

  // Execute every event with time <= t_end; returns the number of flips.
  std::int64_t run_until(double t_end);

  void set_record_flips(bool on) { record_ = on; }
  const std::vector<FlipRecord>& flip_log() const { return log_; }
  std::int64_t truncation_hits() const { return trunc_hits_; }
  const WaitingTimeDist& waiting_dist() const { return dist_; }

  friend SimState init_dynamics(const TorusGrid& start,
                                const WaitingTimeDist& dist,
                                std::uint64_t clock_seed);

 private:
  double draw_clock();
  void reschedule_window(std::int64_t u);
  void compact_heap();

  TorusGrid g_;
  NeighborhoodCounts cnt_;
  std::vector<std::uint32_t> epoch_;
  std::vector<std::uint8_t> pstable_;
  std::vector<double> onset_;
  std::priority_queue<FlipEvent, std::vector<FlipEvent>, bool (*)(const FlipEvent&, const FlipEvent&)>
      heap_{&SimState::event_after};
  static bool event_after(const FlipEvent& a, const FlipEvent& b);

  WaitingTimeDist dist_;
  CounterRng clock_rng_;
  double t_ = 0.0;
  std::int64_t flips_ = 0;
  std::int64_t lyap_ = 0;
  std::int64_t pstable_count_ = 0;
  std::int64_t trunc_hits_ = 0;
  bool record_ = false;
  std::vector<FlipRecord> log_;
};

// Build counts, mark the initially p-stable particles in node order, and
// draw their first clocks. Clock draws come from the clock stream of
// clock_seed, independent of the grid stream that produced the start state.
SimState init_dynamics(const TorusGrid& start, const WaitingTimeDist& dist,
                       std::uint64_t clock_seed);

// Sum of k(u) over the grid.
std::int64_t lyapunov(const NeighborhoodCounts& cnt);

}  // namespace schelling
