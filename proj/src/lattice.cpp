#include "schelling/lattice.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace schelling {

Params::Params(std::int32_t h_, std::int32_t w_, std::int32_t tauN_, Boundary b)
    : h(h_), w(w_), tauN(tauN_), boundary(b) {
  if (w < 1) throw std::domain_error("params: w must be >= 1");
  if (h < 2 * w + 1) throw std::domain_error("params: need h >= 2w+1");
  if (tauN < 1 || tauN > N()) throw std::domain_error("params: tauN must be in [1, N]");
}

std::int32_t tau_quantize(double tau_tilde, std::int32_t N) {
  if (!(tau_tilde > 0.0 && tau_tilde < 1.0))
    throw std::domain_error("tau_quantize: tau_tilde must be in (0, 1)");
  if (N < 1) throw std::domain_error("tau_quantize: N must be >= 1");
  const double v = tau_tilde * double(N);
  const double r = std::round(v);
  // Snap products that are integers in exact arithmetic, e.g. (1/9)*9.
  if (std::abs(v - r) < 1e-9 * std::max(1.0, std::abs(v)))
    return std::int32_t(r);
  return std::int32_t(std::ceil(v));
}

TorusGrid::TorusGrid(const Params& p, std::uint64_t seed) : p_(p), seed_(seed) {
  words_.assign((std::uint64_t(size()) + 63) / 64, 0);
}

std::int64_t TorusGrid::count_theta() const {
  std::int64_t n = 0;
  for (std::uint64_t wv : words_) n += std::popcount(wv);
  return n;
}

bool TorusGrid::is_monochromatic() const {
  const std::int64_t t = count_theta();
  return t == 0 || t == size();
}

TorusGrid new_random(const Params& p, std::uint64_t seed, double p_theta) {
  TorusGrid g(p, seed);
  CounterRng base(seed, kGridStream);
  const std::uint64_t key = base.key();
  const std::int64_t n = g.size();
  for (std::int64_t u = 0; u < n; ++u) {
    // Direct keyed evaluation at counter u; order-independent by design.
    const double x = double(mix64(key + 0x9e3779b97f4a7c15ULL * std::uint64_t(u + 1)) >> 11) *
                     0x1.0p-53;
    if (x < p_theta) g.set(u, true);
  }
  return g;
}

std::int32_t cnt_in_window(const Params& p, std::int32_t r, std::int32_t c) {
  if (p.boundary == Boundary::torus) return p.N();
  const std::int32_t r0 = std::max(0, r - p.w), r1 = std::min(p.h - 1, r + p.w);
  const std::int32_t c0 = std::max(0, c - p.w), c1 = std::min(p.h - 1, c + p.w);
  return (r1 - r0 + 1) * (c1 - c0 + 1);
}

ThetaSums::ThetaSums(const TorusGrid& g) : h_(g.h()) {
  if (h_ > 46340)
    throw std::overflow_error("theta sums: h too large for 32-bit accumulators");
  sat_.assign(std::size_t(h_ + 1) * (h_ + 1), 0);
  for (std::int32_t r = 0; r < h_; ++r) {
    std::uint32_t row = 0;
    for (std::int32_t c = 0; c < h_; ++c) {
      row += g.get(r, c);
      sat_[idx(r + 1, c + 1)] = sat_[idx(r, c + 1)] + row;
    }
  }
}

std::int64_t ThetaSums::rect_torus(std::int32_t r0, std::int32_t c0, std::int32_t r1,
                                   std::int32_t c1) const {
  const std::int32_t rows = r1 - r0 + 1, cols = c1 - c0 + 1;
  if (rows < 1 || cols < 1 || rows > h_ || cols > h_)
    throw std::domain_error("theta sums: bad torus rectangle span");
  auto wrap = [this](std::int32_t x) {
    x %= h_;
    return x < 0 ? x + h_ : x;
  };
  const std::int32_t rs = wrap(r0), cs = wrap(c0);
  struct Seg {
    std::int32_t a, b;
  };
  Seg rseg[2], cseg[2];
  int nr = 0, nc = 0;
  if (rs + rows <= h_) {
    rseg[nr++] = {rs, rs + rows - 1};
  } else {
    rseg[nr++] = {rs, h_ - 1};
    rseg[nr++] = {0, rs + rows - h_ - 1};
  }
  if (cs + cols <= h_) {
    cseg[nc++] = {cs, cs + cols - 1};
  } else {
    cseg[nc++] = {cs, h_ - 1};
    cseg[nc++] = {0, cs + cols - h_ - 1};
  }
  std::int64_t total = 0;
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j)
      total += plain(rseg[i].a, cseg[j].a, rseg[i].b, cseg[j].b);
  return total;
}

std::int64_t ThetaSums::rect_clipped(std::int32_t r0, std::int32_t c0, std::int32_t r1,
                                     std::int32_t c1) const {
  r0 = std::max(r0, 0);
  c0 = std::max(c0, 0);
  r1 = std::min(r1, h_ - 1);
  c1 = std::min(c1, h_ - 1);
  if (r0 > r1 || c0 > c1) return 0;
  return plain(r0, c0, r1, c1);
}

NeighborhoodCounts build_counts(const TorusGrid& g) {
  const Params& p = g.params();
  NeighborhoodCounts out;
  out.h = p.h;
  const std::int64_t n = g.size();
  out.c_theta.assign(std::size_t(n), 0);
  out.k.assign(std::size_t(n), 0);

  ThetaSums sums(g);
  const std::int32_t w = p.w;
  for (std::int32_t r = 0; r < p.h; ++r) {
    for (std::int32_t c = 0; c < p.h; ++c) {
      std::int64_t ct;
      std::int32_t in;
      if (p.boundary == Boundary::torus) {
        ct = sums.rect_torus(r - w, c - w, r + w, c + w);
        in = p.N();
      } else {
        ct = sums.rect_clipped(r - w, c - w, r + w, c + w);
        in = cnt_in_window(p, r, c);
      }
      const std::int64_t u = std::int64_t(r) * p.h + c;
      out.c_theta[std::size_t(u)] = std::uint16_t(ct);
      out.k[std::size_t(u)] = std::uint16_t(g.get(u) ? ct : in - ct);
    }
  }
  return out;
}

void apply_flip(TorusGrid& g, NeighborhoodCounts& cnt, std::int64_t u) {
  const Params& p = g.params();
  const std::int32_t h = p.h, w = p.w;
  const std::int32_t r = std::int32_t(u / h), c = std::int32_t(u % h);
  const bool new_state = !g.get(u);
  g.set(u, new_state);
  g.bump_generation();
  const std::int32_t dc_theta = new_state ? 1 : -1;

  for (std::int32_t dr = -w; dr <= w; ++dr) {
    std::int32_t vr = r + dr;
    if (p.boundary == Boundary::torus) {
      if (vr < 0) vr += h;
      else if (vr >= h) vr -= h;
    } else if (vr < 0 || vr >= h) {
      continue;
    }
    const std::int64_t row_base = std::int64_t(vr) * h;
    for (std::int32_t dcc = -w; dcc <= w; ++dcc) {
      std::int32_t vc = c + dcc;
      if (p.boundary == Boundary::torus) {
        if (vc < 0) vc += h;
        else if (vc >= h) vc -= h;
      } else if (vc < 0 || vc >= h) {
        continue;
      }
      const std::int64_t v = row_base + vc;
      cnt.c_theta[std::size_t(v)] = std::uint16_t(cnt.c_theta[std::size_t(v)] + dc_theta);
      if (v == u) continue;
      // v's own state is unchanged; it gains or loses exactly one match.
      if (g.get(v) == new_state)
        ++cnt.k[std::size_t(v)];
      else
        --cnt.k[std::size_t(v)];
    }
  }
  // The flipped node now matches what it used to mismatch, plus itself.
  const std::int32_t in = cnt_in_window(p, r, c);
  cnt.k[std::size_t(u)] = std::uint16_t(in - cnt.k[std::size_t(u)] + 1);
}

bool is_stable(const Params& p, const NeighborhoodCounts& cnt, std::int64_t u) {
  (void)p;
  return cnt.k[std::size_t(u)] >= p.tauN;
}

bool is_p_stable(const Params& p, const NeighborhoodCounts& cnt, std::int64_t u) {
  const std::int32_t k = cnt.k[std::size_t(u)];
  if (k >= p.tauN) return false;
  const std::int32_t in =
      p.boundary == Boundary::torus
          ? p.N()
          : cnt_in_window(p, std::int32_t(u / p.h), std::int32_t(u % p.h));
  return in - k + 1 >= p.tauN;
}

bool is_state_affected(const TorusGrid& g, const NeighborhoodCounts& cnt,
                       std::int64_t u, bool state) {
  const Params& p = g.params();
  const std::int32_t in =
      p.boundary == Boundary::torus
          ? p.N()
          : cnt_in_window(p, std::int32_t(u / p.h), std::int32_t(u % p.h));
  // Matching others in N(u): theta count minus the actual occupant if it is
  // itself theta (and symmetrically for theta_bar).
  const std::int32_t ct = cnt.c_theta[std::size_t(u)];
  const std::int32_t others = state ? ct - (g.get(u) ? 1 : 0)
                                    : (in - ct) - (g.get(u) ? 0 : 1);
  const std::int32_t k_hyp = others + 1;
  if (k_hyp >= p.tauN) return false;
  return in - k_hyp + 1 >= p.tauN;
}

}  // namespace schelling
