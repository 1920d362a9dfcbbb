#include "schelling/passage.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <utility>

namespace schelling {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool modified_event_after(const FlipEvent& a, const FlipEvent& b) {
  if (a.time != b.time) return a.time > b.time;
  return a.node > b.node;
}

}  // namespace

ModifiedSim::ModifiedSim(const TorusGrid& window, const WaitingTimeDist& dist,
                         std::uint64_t clock_seed)
    : g_(window), heap_(&modified_event_after) {
  const Params& p = g_.params();
  if (p.boundary != Boundary::open)
    throw std::invalid_argument("modified model runs on an open window");
  dist.validate();

  cnt_ = build_counts(g_);
  const std::int64_t n = g_.size();
  t_i_.resize(std::size_t(n));
  CounterRng rng(clock_seed, kClockStream);
  for (std::int64_t u = 0; u < n; ++u) t_i_[std::size_t(u)] = dist.sample(rng);

  astar_.assign(std::size_t(n), 0);
  flipped_.assign(std::size_t(n), 0);
  scheduled_.assign(std::size_t(n), 0);
  pstable_.assign(std::size_t(n), 0);
  frozen_.assign(std::size_t(n), 0);
  arrivals_.rows = p.h;
  arrivals_.cols = p.h;
  arrivals_.t.assign(std::size_t(n), kInf);

  for (std::int32_t r = 0; r < p.h; ++r) {
    for (std::int32_t c = 0; c < p.h; ++c) {
      const std::int64_t u = std::int64_t(r) * p.h + c;
      if (r < p.w || r >= p.h - p.w || c < p.w || c >= p.h - p.w)
        frozen_[std::size_t(u)] = 1;
      if (is_p_stable(p, cnt_, u)) {
        pstable_[std::size_t(u)] = 1;
        if (!frozen_[std::size_t(u)]) {
          heap_.push({t_i_[std::size_t(u)], u, 0});
          scheduled_[std::size_t(u)] = 1;
        }
      }
      if (is_theta_affected(g_, cnt_, u)) arrivals_.t[std::size_t(u)] = 0.0;
    }
  }
}

void ModifiedSim::seed_affected_block(std::int64_t center) {
  const Params& p = g_.params();
  const std::int32_t rB = p.w / 2;
  const std::int32_t cr = std::int32_t(center / p.h), cc = std::int32_t(center % p.h);
  if (center < 0 || center >= g_.size() || cr - rB < 0 || cr + rB >= p.h ||
      cc - rB < 0 || cc + rB >= p.h)
    throw std::domain_error("affected* block must lie inside the window");
  if (seed_center_ < 0) seed_center_ = center;

  for (std::int32_t r = cr - rB; r <= cr + rB; ++r) {
    for (std::int32_t c = cc - rB; c <= cc + rB; ++c) {
      const std::int64_t v = std::int64_t(r) * p.h + c;
      astar_[std::size_t(v)] = 1;
      arrivals_.t[std::size_t(v)] = std::min(arrivals_.t[std::size_t(v)], now_);
      if (g_.get(v) && !flipped_[std::size_t(v)] && !scheduled_[std::size_t(v)] &&
          !frozen_[std::size_t(v)]) {
        heap_.push({now_ + t_i_[std::size_t(v)], v, 0});
        scheduled_[std::size_t(v)] = 1;
      }
    }
  }
}

void ModifiedSim::note_status_around(std::int64_t u) {
  const Params& p = g_.params();
  const std::int32_t ur = std::int32_t(u / p.h), uc = std::int32_t(u % p.h);
  const std::int32_t r0 = std::max(ur - p.w, 0), r1 = std::min(ur + p.w, p.h - 1);
  const std::int32_t c0 = std::max(uc - p.w, 0), c1 = std::min(uc + p.w, p.h - 1);
  for (std::int32_t r = r0; r <= r1; ++r) {
    for (std::int32_t c = c0; c <= c1; ++c) {
      const std::int64_t v = std::int64_t(r) * p.h + c;
      const bool ps = is_p_stable(p, cnt_, v);
      if (ps != (pstable_[std::size_t(v)] != 0)) {
        pstable_[std::size_t(v)] = ps ? 1 : 0;
        if (ps && !scheduled_[std::size_t(v)] && !flipped_[std::size_t(v)] &&
            !frozen_[std::size_t(v)]) {
          heap_.push({now_ + t_i_[std::size_t(v)], v, 0});
          scheduled_[std::size_t(v)] = 1;
        }
      }
      if (arrivals_.t[std::size_t(v)] == kInf && is_theta_affected(g_, cnt_, v))
        arrivals_.t[std::size_t(v)] = now_;
    }
  }
}

const ArrivalField& ModifiedSim::run_modified(double horizon) {
  while (!heap_.empty() && heap_.top().time <= horizon) {
    const FlipEvent ev = heap_.top();
    heap_.pop();
    assert(ev.time >= now_);
    assert(!flipped_[std::size_t(ev.node)]);
    now_ = ev.time;
    apply_flip(g_, cnt_, ev.node);
    flipped_[std::size_t(ev.node)] = 1;
    log_.push_back({now_, ev.node, g_.get(ev.node)});
    note_status_around(ev.node);
  }
  if (std::isfinite(horizon) && horizon > now_) now_ = horizon;
  return arrivals_;
}

std::optional<std::pair<std::int32_t, std::int32_t>> RenormFPP::block_of(
    std::int64_t u) const {
  const std::int32_t r = std::int32_t(u / h), c = std::int32_t(u % h);
  if (r < r0 || c < c0) return std::nullopt;
  const std::int32_t i = (r - r0) / block_side, j = (c - c0) / block_side;
  if (i >= nbi || j >= nbj) return std::nullopt;
  return std::make_pair(i, j);
}

RenormFPP build_renorm_fpp(const ModifiedSim& sim) {
  const Params& p = sim.grid().params();
  if (sim.seed_center() < 0)
    throw std::domain_error("seed the affected* block before renormalizing");
  RenormFPP out;
  out.h = p.h;
  out.block_side = 2 * (p.w / 2) + 1;
  const std::int32_t sr = std::int32_t(sim.seed_center() / p.h);
  const std::int32_t sc = std::int32_t(sim.seed_center() % p.h);
  out.r0 = (sr - p.w / 2) % out.block_side;
  out.c0 = (sc - p.w / 2) % out.block_side;
  out.nbi = (p.h - out.r0) / out.block_side;
  out.nbj = (p.h - out.c0) / out.block_side;
  out.weight.assign(std::size_t(out.nbi) * out.nbj, 0.0);
  out.usable.assign(std::size_t(out.nbi) * out.nbj, 0);
  for (std::int32_t i = 0; i < out.nbi; ++i) {
    for (std::int32_t j = 0; j < out.nbj; ++j) {
      const std::int32_t rlo = out.r0 + i * out.block_side;
      const std::int32_t clo = out.c0 + j * out.block_side;
      double wsum = 0.0;
      for (std::int32_t r = rlo; r < rlo + out.block_side; ++r)
        for (std::int32_t c = clo; c < clo + out.block_side; ++c)
          wsum += sim.flip_time(std::int64_t(r) * p.h + c);
      out.weight[std::size_t(i) * out.nbj + j] = wsum;
      // One spare cell past the frozen band keeps every block-to-block
      // sliding placement inside the certified region-of-expansion margin.
      const bool clear = rlo >= p.w + 1 && clo >= p.w + 1 &&
                         rlo + out.block_side - 1 <= p.h - 2 - p.w &&
                         clo + out.block_side - 1 <= p.h - 2 - p.w;
      out.usable[std::size_t(i) * out.nbj + j] = clear ? 1 : 0;
    }
  }
  return out;
}

double fpp_oracle_upper(const RenormFPP& rfpp, std::int64_t x, std::int64_t y) {
  const auto bx = rfpp.block_of(x), by = rfpp.block_of(y);
  if (!bx || !by) return kInf;
  const auto id = [&](std::int32_t i, std::int32_t j) {
    return std::size_t(i) * rfpp.nbj + j;
  };
  if (!rfpp.usable[id(bx->first, bx->second)] || !rfpp.usable[id(by->first, by->second)])
    return kInf;

  std::vector<double> dist(rfpp.weight.size(), kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[id(bx->first, bx->second)] = rfpp.weight[id(bx->first, bx->second)];
  pq.push({dist[id(bx->first, bx->second)], id(bx->first, bx->second)});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    const std::int32_t i = std::int32_t(u / rfpp.nbj), j = std::int32_t(u % rfpp.nbj);
    const std::int32_t di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    for (int s = 0; s < 4; ++s) {
      const std::int32_t ni = i + di[s], nj = j + dj[s];
      if (ni < 0 || nj < 0 || ni >= rfpp.nbi || nj >= rfpp.nbj) continue;
      if (!rfpp.usable[id(ni, nj)]) continue;
      const double nd = d + rfpp.weight[id(ni, nj)];
      if (nd < dist[id(ni, nj)]) {
        dist[id(ni, nj)] = nd;
        pq.push({nd, id(ni, nj)});
      }
    }
  }
  return dist[id(by->first, by->second)];
}

bool window_has_affected_node(const TorusGrid& g, const NeighborhoodCounts& cnt) {
  for (std::int64_t u = 0; u < g.size(); ++u)
    if (is_state_affected(g, cnt, u, true) || is_state_affected(g, cnt, u, false))
      return true;
  return false;
}

bool window_is_region_of_expansion(const TorusGrid& g) {
  const Params& p = g.params();
  if (p.boundary != Boundary::open)
    throw std::invalid_argument("window predicate expects an open boundary");
  const ThetaSums sums(g);
  const std::int32_t rB = p.w / 2, rr = rB + 1;
  const std::int32_t N = p.N(), tauN = p.tauN;
  const std::int32_t lo = p.w + rr, hi = p.h - 1 - p.w - rr;
  for (std::int32_t vr = lo; vr <= hi; ++vr) {
    for (std::int32_t vc = lo; vc <= hi; ++vc) {
      for (std::int32_t dr = -rr; dr <= rr; ++dr) {
        for (std::int32_t dc = -rr; dc <= rr; ++dc) {
          if (std::abs(dr) != rr && std::abs(dc) != rr) continue;
          const std::int32_t xr = vr + dr, xc = vc + dc;
          if (!g.get(xr, xc)) continue;
          const std::int64_t k =
              sums.rect_clipped(xr - p.w, xc - p.w, xr + p.w, xc + p.w);
          const std::int64_t lost = sums.rect_clipped(
              std::max(xr - p.w, vr - rB), std::max(xc - p.w, vc - rB),
              std::min(xr + p.w, vr + rB), std::min(xc + p.w, vc + rB));
          const std::int64_t k_hyp = k - lost;
          if (!(k_hyp < tauN && N - k_hyp + 1 >= tauN)) return false;
        }
      }
    }
  }
  return true;
}

AcceptanceSampler::AcceptanceSampler(const Params& window, std::uint64_t seed,
                                     std::int32_t dots)
    : p_(window), seed_(seed), dots_(dots) {
  if (p_.boundary != Boundary::open)
    throw std::invalid_argument("sampler draws open windows");
  if (dots_ < 0) throw std::invalid_argument("dots must be nonnegative");
}

bool AcceptanceSampler::admissible(const TorusGrid& g, const NeighborhoodCounts& cnt) {
  return !window_has_affected_node(g, cnt) && window_is_region_of_expansion(g);
}

TorusGrid AcceptanceSampler::next() {
  for (;;) {
    const std::uint64_t index = std::uint64_t(proposals_++);
    CounterRng rng =
        CounterRng::from_key(derive_key(derive_key(seed_, kReplicaStream), index));
    const bool phase = rng.next_below(2) != 0;
    TorusGrid g(p_, seed_);
    for (std::int32_t r = 0; r < p_.h; ++r)
      for (std::int32_t c = 0; c < p_.h; ++c)
        g.set(r, c, (((r + c) & 1) != 0) == phase);
    for (std::int32_t d = 0; d < dots_; ++d)
      g.toggle(std::int64_t(rng.next_below(std::uint64_t(g.size()))));
    g.set_generation(index);
    const NeighborhoodCounts cnt = build_counts(g);
    const bool ok = admissible(g, cnt);
    outcomes_.push_back(ok ? 1 : 0);
    if (ok) {
      ++accepted_;
      return g;
    }
  }
}

std::string AcceptanceSampler::acceptance_log() const {
  std::string out = "proposal,accepted\n";
  char line[48];
  for (std::size_t i = 0; i < outcomes_.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%d\n", i, int(outcomes_[i]));
    out += line;
  }
  return out;
}

ShapeStats shape_stats(const ArrivalField& f, double t, std::int64_t origin_node,
                       const Params& p, std::int32_t sectors) {
  if (t <= 0.0) throw std::invalid_argument("level-set time must be positive");
  if (sectors < 1) throw std::invalid_argument("need at least one sector");
  ShapeStats s;
  s.t = t;
  s.radial.assign(std::size_t(sectors), 0.0);
  const std::int32_t orow = std::int32_t(origin_node / f.cols);
  const std::int32_t ocol = std::int32_t(origin_node % f.cols);
  std::int32_t minr = f.rows, maxr = -1, minc = f.cols, maxc = -1;
  const double two_pi = 8.0 * std::atan(1.0);
  for (std::int32_t r = 0; r < f.rows; ++r) {
    for (std::int32_t c = 0; c < f.cols; ++c) {
      if (!(f.at(r, c) <= t)) continue;
      ++s.level_set_size;
      minr = std::min(minr, r);
      maxr = std::max(maxr, r);
      minc = std::min(minc, c);
      maxc = std::max(maxc, c);
      if (r == orow && c == ocol) continue;
      const double ang = std::atan2(double(r - orow), double(c - ocol));
      std::int32_t sec = std::int32_t((ang + two_pi / 2) / (two_pi / sectors));
      sec = std::clamp(sec, 0, sectors - 1);
      const double rad = std::hypot(double(r - orow), double(c - ocol));
      s.radial[std::size_t(sec)] = std::max(s.radial[std::size_t(sec)], rad);
    }
  }
  s.valid = s.level_set_size > 0 && minr >= 2 * p.w && minc >= 2 * p.w &&
            maxr <= f.rows - 1 - 2 * p.w && maxc <= f.cols - 1 - 2 * p.w;
  s.fitted_radii.resize(std::size_t(sectors));
  for (std::int32_t k = 0; k < sectors; ++k)
    s.fitted_radii[std::size_t(k)] = s.radial[std::size_t(k)] / t;
  const double mx = *std::max_element(s.radial.begin(), s.radial.end());
  const double mn = *std::min_element(s.radial.begin(), s.radial.end());
  double mean = 0.0;
  for (double v : s.radial) mean += v;
  mean /= double(sectors);
  s.anisotropy = mean > 0.0 ? (mx - mn) / mean : 0.0;
  return s;
}

std::vector<ConcentrationRow> concentration_stats(
    const std::vector<ArrivalField>& replicas, const std::vector<std::int64_t>& targets,
    std::int64_t origin_node) {
  if (replicas.size() < 2)
    throw std::domain_error("concentration needs at least two replicas");
  const std::int32_t cols = replicas.front().cols;
  const std::int32_t orow = std::int32_t(origin_node / cols);
  const std::int32_t ocol = std::int32_t(origin_node % cols);
  std::vector<ConcentrationRow> out;
  out.reserve(targets.size());
  for (std::int64_t u : targets) {
    ConcentrationRow row;
    row.target = u;
    const std::int32_t r = std::int32_t(u / cols), c = std::int32_t(u % cols);
    row.distance = double(std::max(std::abs(r - orow), std::abs(c - ocol)));
    if (row.distance < 2.0)
      throw std::invalid_argument("target too close to the origin to normalize");
    double sum = 0.0;
    for (const ArrivalField& f : replicas) {
      const double a = f.t[std::size_t(u)];
      row.samples.push_back(a);
      if (std::isfinite(a)) {
        ++row.finite_samples;
        sum += a;
      }
    }
    if (row.finite_samples > 0) row.mean = sum / double(row.finite_samples);
    if (row.finite_samples > 1) {
      double ss = 0.0;
      for (double a : row.samples)
        if (std::isfinite(a)) ss += (a - row.mean) * (a - row.mean);
      row.stddev = std::sqrt(ss / double(row.finite_samples - 1));
    }
    row.normalized = row.stddev / std::sqrt(row.distance * std::log(row.distance));
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<std::uint8_t> level_set_pixels(const ArrivalField& f, double t) {
  std::vector<std::uint8_t> px(f.t.size(), 0);
  for (std::size_t i = 0; i < f.t.size(); ++i)
    if (f.t[i] <= t) px[i] = 255;
  return px;
}

nlohmann::json shape_stats_json(const ShapeStats& s) {
  return nlohmann::json{{"t", s.t},
                        {"level_set_size", s.level_set_size},
                        {"valid", s.valid},
                        {"anisotropy", s.anisotropy},
                        {"radial", s.radial},
                        {"fitted_radii", s.fitted_radii}};
}

}  // namespace schelling
