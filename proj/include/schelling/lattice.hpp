#pragma once

#include <cstdint>
#include <vector>

#include "schelling/rng.hpp"

namespace schelling {

enum class Boundary : std::uint8_t { torus, open };

// Model parameters. The neighborhood of a node is the full (2w+1)x(2w+1)
// square around it, the node itself included, so |N(u)| = N is odd.
// The intolerance threshold is stored as the integer tauN: a particle is
// stable iff its same-state count k(u) (self included) satisfies
// k(u) >= tauN. Quantizing once up front keeps every later comparison an
// exact integer test.
struct Params {
  std::int32_t h = 0;       // side of the grid
  std::int32_t w = 0;       // neighborhood radius (l-infinity)
  std::int32_t tauN = 0;    // integer threshold, 1..N
  Boundary boundary = Boundary::torus;

  std::int32_t N() const { return (2 * w + 1) * (2 * w + 1); }

  Params() = default;
  Params(std::int32_t h_, std::int32_t w_, std::int32_t tauN_,
         Boundary b = Boundary::torus);
};

// ceil(tau_tilde * N) with an epsilon snap so exact-integer products do not
// get pushed up a step by floating-point dust. tau_tilde must be in (0,1).
std::int32_t tau_quantize(double tau_tilde, std::int32_t N);

// Bit-packed binary configuration. State true is written theta below; the
// complement is theta_bar. Row-major, node index u = r*h + c.
class TorusGrid {
 public:
  TorusGrid() = default;
  TorusGrid(const Params& p, std::uint64_t seed);

  const Params& params() const { return p_; }
  std::int32_t h() const { return p_.h; }
  std::int64_t size() const { return std::int64_t(p_.h) * p_.h; }

  bool get(std::int64_t u) const {
    return (words_[std::uint64_t(u) >> 6] >> (u & 63)) & 1u;
  }
  bool get(std::int32_t r, std::int32_t c) const { return get(std::int64_t(r) * p_.h + c); }

  void set(std::int64_t u, bool v) {
    const std::uint64_t mask = 1ULL << (u & 63);
    if (v)
      words_[std::uint64_t(u) >> 6] |= mask;
    else
      words_[std::uint64_t(u) >> 6] &= ~mask;
  }
  void set(std::int32_t r, std::int32_t c, bool v) { set(std::int64_t(r) * p_.h + c, v); }

  void toggle(std::int64_t u) { words_[std::uint64_t(u) >> 6] ^= 1ULL << (u & 63); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t generation() const { return generation_; }
  void bump_generation() { ++generation_; }
  void set_seed(std::uint64_t s) { seed_ = s; }
  void set_generation(std::uint64_t g) { generation_ = g; }

  std::int64_t count_theta() const;
  bool is_monochromatic() const;

  bool operator==(const TorusGrid& o) const {
    return p_.h == o.p_.h && p_.w == o.p_.w && p_.tauN == o.p_.tauN && words_ == o.words_;
  }

 private:
  Params p_;
  std::uint64_t seed_ = 0;
  std::uint64_t generation_ = 0;
  std::vector<std::uint64_t> words_;
};

// Fresh i.i.d. configuration; site u is theta with probability p_theta.
// Site states come from the grid stream at counter = u, so two grids with
// the same seed agree site by site regardless of construction order.
TorusGrid new_random(const Params& p, std::uint64_t seed, double p_theta = 0.5);

// Per-node theta counts and same-state counts over N(u).
//   c_theta(u) = number of theta sites in N(u)          (self included)
//   k(u)       = number of sites in N(u) matching s(u)  (self included)
// On a torus k = c_theta or N - c_theta. With an open boundary, sites
// beyond the edge count as mismatches for both states (the denominator
// stays N), so k only counts in-window matches and cnt_in(u) = |N(u)
// inside the window| enters the flip threshold.
struct NeighborhoodCounts {
  std::int32_t h = 0;
  std::vector<std::uint16_t> c_theta;
  std::vector<std::uint16_t> k;

  std::uint16_t ctheta_at(std::int64_t u) const { return c_theta[std::size_t(u)]; }
  std::uint16_t k_at(std::int64_t u) const { return k[std::size_t(u)]; }
};

// Number of in-window sites of N(u); equals N on a torus.
std::int32_t cnt_in_window(const Params& p, std::int32_t r, std::int32_t c);

// Full O(h^2) rebuild via summed-area tables. Throws if h is large enough
// for the 32-bit area accumulators to overflow (h > 46340).
NeighborhoodCounts build_counts(const TorusGrid& g);

// Toggle s(u) and patch the counts of every v in N(u) in O(N).
void apply_flip(TorusGrid& g, NeighborhoodCounts& cnt, std::int64_t u);

// Stability predicates. A particle is stable iff k >= tauN. It is p-stable
// iff it is unstable and flipping it would make it stable, i.e.
// cnt_in - k + 1 >= tauN (torus: N - k + 1).
bool is_stable(const Params& p, const NeighborhoodCounts& cnt, std::int64_t u);
bool is_p_stable(const Params& p, const NeighborhoodCounts& cnt, std::int64_t u);

// Would a hypothetical particle of the given state at node u be p-stable?
// The hypothetical occupant replaces the actual one, so its same-state
// count is (matching others in N(u)) + 1.
bool is_state_affected(const TorusGrid& g, const NeighborhoodCounts& cnt,
                       std::int64_t u, bool state);

inline bool is_theta_affected(const TorusGrid& g, const NeighborhoodCounts& cnt,
                              std::int64_t u) {
  return is_state_affected(g, cnt, u, true);
}

// Summed-area table over theta indicators, for O(1) rectangle counts.
// Rectangles are inclusive; torus queries may wrap and split into up to
// four plain rectangles, open-boundary queries clip.
class ThetaSums {
 public:
  explicit ThetaSums(const TorusGrid& g);

  // Inclusive rectangle [r0..r1] x [c0..c1] in torus coordinates (any
  // integers; spans must not exceed h).
  std::int64_t rect_torus(std::int32_t r0, std::int32_t c0, std::int32_t r1,
                          std::int32_t c1) const;
  // Same, clipped to the window.
  std::int64_t rect_clipped(std::int32_t r0, std::int32_t c0, std::int32_t r1,
                            std::int32_t c1) const;

  std::int32_t h() const { return h_; }

 private:
  std::int64_t plain(std::int32_t r0, std::int32_t c0, std::int32_t r1,
                     std::int32_t c1) const {
    // Requires 0 <= r0, r1 < h and likewise for columns.
    return std::int64_t(sat_[idx(r1 + 1, c1 + 1)]) - sat_[idx(r0, c1 + 1)] -
           sat_[idx(r1 + 1, c0)] + sat_[idx(r0, c0)];
  }
  std::size_t idx(std::int32_t r, std::int32_t c) const {
    return std::size_t(r) * (h_ + 1) + c;
  }
  std::int32_t h_ = 0;
  std::vector<std::uint32_t> sat_;
};

}  // namespace schelling
