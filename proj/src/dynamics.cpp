#include "schelling/dynamics.hpp"

#include <cassert>
#include <cmath>

namespace schelling {

bool SimState::event_after(const FlipEvent& a, const FlipEvent& b) {
  if (a.time != b.time) return a.time > b.time;
  if (a.node != b.node) return a.node > b.node;
  return a.epoch > b.epoch;
}

std::int64_t lyapunov(const NeighborhoodCounts& cnt) {
  std::int64_t s = 0;
  for (auto k : cnt.k) s += k;
  return s;
}

std::int64_t SimState::lyapunov_rebuild() const { return schelling::lyapunov(cnt_); }

double SimState::draw_clock() {
  double t = dist_.sample(clock_rng_);
  if (dist_.truncate_at > 0.0 && t >= dist_.truncate_at) ++trunc_hits_;
  return t;
}

SimState init_dynamics(const TorusGrid& start, const WaitingTimeDist& dist,
                       std::uint64_t clock_seed) {
  dist.validate();
  SimState s;
  s.g_ = start;
  s.cnt_ = build_counts(s.g_);
  s.dist_ = dist;
  s.clock_rng_ = CounterRng(clock_seed, kClockStream);
  const std::int64_t n = s.g_.size();
  s.epoch_.assign(std::size_t(n), 0);
  s.pstable_.assign(std::size_t(n), 0);
  s.onset_.assign(std::size_t(n), 0.0);
  s.lyap_ = s.lyapunov_rebuild();
  const Params& p = s.g_.params();
  for (std::int64_t u = 0; u < n; ++u) {
    if (is_p_stable(p, s.cnt_, u)) {
      s.pstable_[std::size_t(u)] = 1;
      ++s.pstable_count_;
      s.heap_.push({s.draw_clock(), u, 0});
    }
  }
  return s;
}

// Recheck p-stability across N(u) after a flip at u. Any status change
// bumps the node's epoch; a fresh onset gets a fresh clock.
void SimState::reschedule_window(std::int64_t u) {
  const Params& p = g_.params();
  const std::int32_t h = p.h, w = p.w;
  const std::int32_t r = std::int32_t(u / h), c = std::int32_t(u % h);
  for (std::int32_t dr = -w; dr <= w; ++dr) {
    std::int32_t rr = r + dr;
    if (p.boundary == Boundary::torus) {
      rr = (rr % h + h) % h;
    } else if (rr < 0 || rr >= h) {
      continue;
    }
    for (std::int32_t dc = -w; dc <= w; ++dc) {
      std::int32_t cc = c + dc;
      if (p.boundary == Boundary::torus) {
        cc = (cc % h + h) % h;
      } else if (cc < 0 || cc >= h) {
        continue;
      }
      const std::int64_t v = std::int64_t(rr) * h + cc;
      const bool now = is_p_stable(p, cnt_, v);
      if (now == (pstable_[std::size_t(v)] != 0)) continue;
      ++epoch_[std::size_t(v)];
      pstable_[std::size_t(v)] = now ? 1 : 0;
      pstable_count_ += now ? 1 : -1;
      if (now) {
        onset_[std::size_t(v)] = t_;
        heap_.push({t_ + draw_clock(), v, epoch_[std::size_t(v)]});
      }
    }
  }
}

std::optional<FlipEvent> SimState::peek_next() {
  while (!heap_.empty()) {
    const FlipEvent ev = heap_.top();
    if (epoch_[std::size_t(ev.node)] == ev.epoch) return ev;
    heap_.pop();
  }
  return std::nullopt;
}

// Every p-stable node owns exactly one live event; anything beyond that is
// stale. Rebuilding once stale events dominate keeps the heap linear in the
// p-stable set instead of in the total number of status changes.
void SimState::compact_heap() {
  std::vector<FlipEvent> live;
  live.reserve(std::size_t(pstable_count_));
  while (!heap_.empty()) {
    const FlipEvent ev = heap_.top();
    heap_.pop();
    if (epoch_[std::size_t(ev.node)] == ev.epoch) live.push_back(ev);
  }
  for (const FlipEvent& ev : live) heap_.push(ev);
}

std::optional<FlipRecord> SimState::step() {
  if (heap_.size() > 65536 &&
      std::int64_t(heap_.size()) > 4 * (pstable_count_ + 1))
    compact_heap();
  auto evo = peek_next();
  if (!evo) return std::nullopt;
  heap_.pop();
  const FlipEvent ev = *evo;
  assert(ev.time >= t_);
  assert(pstable_[std::size_t(ev.node)]);
  t_ = ev.time;

  const std::int64_t k_old = cnt_.k[std::size_t(ev.node)];
  apply_flip(g_, cnt_, ev.node);
  lyap_ += 2 * (std::int64_t(cnt_.k[std::size_t(ev.node)]) - k_old);
  ++flips_;
  // Flipping a p-stable particle must leave it stable.
  assert(is_stable(g_.params(), cnt_, ev.node));

  reschedule_window(ev.node);

  FlipRecord rec{t_, ev.node, g_.get(ev.node)};
  if (record_) log_.push_back(rec);
  return rec;
}

FinalReport SimState::run_to_final(std::int64_t max_flips) {
  // The default budget is the Lyapunov bound, so hitting it is impossible
  // for a correct implementation; the report is flagged, not thrown.
  if (max_flips < 0) max_flips = std::int64_t(g_.params().N()) * g_.size();
  FinalReport rep;
  rep.lyapunov_start = lyap_;
  std::int64_t done = 0;
  while (done < max_flips) {
    if (!step()) break;
    ++done;
  }
  rep.terminated = !peek_next().has_value();
  rep.final_time = t_;
  rep.flips = flips_;
  rep.lyapunov_end = lyap_;
  return rep;
}

std::int64_t SimState::run_until(double t_end) {
  std::int64_t done = 0;
  for (;;) {
    auto evo = peek_next();
    if (!evo || evo->time > t_end) break;
    step();
    ++done;
  }
  // Time advances to t_end even when no event fires there.
  if (std::isfinite(t_end) && t_end > t_) t_ = t_end;
  return done;
}

}  // namespace schelling
