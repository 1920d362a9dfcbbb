#include "schelling/regions.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "schelling/io.hpp"
#include "schelling/theory.hpp"

namespace schelling {

namespace {

std::int32_t wrap(std::int32_t x, std::int32_t h) { return (x % h + h) % h; }

std::int32_t torus_axis_dist(std::int32_t a, std::int32_t b, std::int32_t h) {
  std::int32_t d = std::abs(a - b) % h;
  return std::min(d, h - d);
}

// Chebyshev dilation of a binary mask by radius m, as two 1-D passes with a
// running count of set sites in the sliding window.
std::vector<std::uint8_t> dilate_cheb(const std::vector<std::uint8_t>& in,
                                      std::int32_t h, std::int32_t m) {
  auto pass = [&](const std::vector<std::uint8_t>& src, bool rows) {
    std::vector<std::uint8_t> out(src.size(), 0);
    for (std::int32_t a = 0; a < h; ++a) {
      auto at = [&](std::int32_t b) -> std::size_t {
        return rows ? std::size_t(b) * h + a : std::size_t(a) * h + b;
      };
      std::int32_t count = 0;
      for (std::int32_t b = -m; b <= m; ++b) count += src[at(wrap(b, h))];
      for (std::int32_t b = 0; b < h; ++b) {
        out[at(b)] = count > 0;
        count -= src[at(wrap(b - m, h))];
        count += src[at(wrap(b + m + 1, h))];
      }
    }
    return out;
  };
  if (2 * m + 1 >= h) return std::vector<std::uint8_t>(in.size(), 1);
  return pass(pass(in, true), false);
}

}  // namespace

// ---------------------------------------------------------------------------
// Monochromatic balls

MonoBallField mono_ball_sizes(const TorusGrid& g) {
  MonoBallField f;
  f.h = g.h();
  if (g.is_monochromatic()) {
    f.full_mono = true;
    return f;
  }
  const std::int32_t h = g.h();
  const bool torus = g.params().boundary == Boundary::torus;
  // Uniform-square DP on the doubled grid captures every wrapping square;
  // sides stay <= h-1 because a uniform side-h square would mean a
  // monochromatic torus.
  const std::int32_t E = torus ? 2 * h - 1 : h;
  std::vector<std::uint16_t> S(std::size_t(E) * E);
  auto color = [&](std::int32_t i, std::int32_t j) {
    return g.get(torus ? i % h : i, torus ? j % h : j);
  };
  std::uint16_t smax = 1;
  for (std::int32_t i = 0; i < E; ++i) {
    for (std::int32_t j = 0; j < E; ++j) {
      std::uint16_t s = 1;
      if (i > 0 && j > 0) {
        const bool c = color(i, j);
        if (color(i - 1, j) == c && color(i, j - 1) == c && color(i - 1, j - 1) == c) {
          const std::uint16_t m =
              std::min({S[std::size_t(i - 1) * E + j], S[std::size_t(i) * E + j - 1],
                        S[std::size_t(i - 1) * E + j - 1]});
          s = std::uint16_t(m + 1);
        }
      }
      S[std::size_t(i) * E + j] = s;
      smax = std::max(smax, s);
    }
  }

  // Paint cells in descending square size; the first brush to reach a cell
  // is its largest covering square. Per-row next-unpainted pointers make
  // each cell's paint O(alpha); dominated corners are skipped outright.
  std::vector<std::vector<std::int32_t>> buckets(std::size_t(smax) + 1);
  for (std::int32_t i = 0; i < E; ++i) {
    for (std::int32_t j = 0; j < E; ++j) {
      const std::uint16_t s = S[std::size_t(i) * E + j];
      if (i + 1 < E && j + 1 < E && S[std::size_t(i + 1) * E + j + 1] > s) continue;
      buckets[s].push_back(i * E + j);
    }
  }

  std::vector<std::int32_t> best(std::size_t(h) * h, 0);
  // nxt[r*(h+1)+c] = smallest unpainted column >= c in row r (h = done).
  std::vector<std::int32_t> nxt(std::size_t(h) * (h + 1));
  for (std::int32_t r = 0; r < h; ++r)
    for (std::int32_t c = 0; c <= h; ++c) nxt[std::size_t(r) * (h + 1) + c] = c;
  auto find = [&](std::int32_t r, std::int32_t c) {
    std::int32_t* base = &nxt[std::size_t(r) * (h + 1)];
    std::int32_t root = c;
    while (base[root] != root) root = base[root];
    while (base[c] != root) {
      std::int32_t n = base[c];
      base[c] = root;
      c = n;
    }
    return root;
  };
  std::int64_t unpainted = std::int64_t(h) * h;

  for (std::int32_t s = smax; s >= 1 && unpainted > 0; --s) {
    for (const std::int32_t corner : buckets[std::size_t(s)]) {
      const std::int32_t ci = corner / E, cj = corner % E;
      // Column span [cj-s+1, cj] as one or two plain torus segments.
      std::int32_t c0 = torus ? wrap(cj - s + 1, h) : cj - s + 1;
      std::int32_t segs[2][2];
      std::int32_t nsegs = 1;
      if (c0 + s - 1 < h) {
        segs[0][0] = c0;
        segs[0][1] = c0 + s - 1;
      } else {
        segs[0][0] = c0;
        segs[0][1] = h - 1;
        segs[1][0] = 0;
        segs[1][1] = c0 + s - 1 - h;
        nsegs = 2;
      }
      for (std::int32_t di = 0; di < s; ++di) {
        const std::int32_t r = torus ? (ci - di) % h : ci - di;
        const std::int32_t rr = r < 0 ? r + h : r;
        for (std::int32_t k = 0; k < nsegs; ++k) {
          std::int32_t c = find(rr, segs[k][0]);
          while (c <= segs[k][1]) {
            best[std::size_t(rr) * h + c] = s;
            nxt[std::size_t(rr) * (h + 1) + c] = c + 1;
            --unpainted;
            c = find(rr, c + 1);
          }
        }
      }
      if (unpainted == 0) break;
    }
  }
  assert(unpainted == 0);

  // A ball is an odd-side square; an even best side shrinks by one.
  f.side.resize(std::size_t(h) * h);
  for (std::size_t u = 0; u < f.side.size(); ++u) {
    const std::int32_t s = best[u];
    f.side[u] = (s % 2 == 1) ? s : s - 1;
  }
  return f;
}

std::int64_t monochromatic_ball_size(const TorusGrid& g, std::int64_t u) {
  return mono_ball_sizes(g).size_at(u);
}

// ---------------------------------------------------------------------------
// Good and bad blocks

BlockMap classify_blocks(const TorusGrid& g, std::int32_t m, double epsilon) {
  const Params& p = g.params();
  if (m < p.w) throw std::domain_error("classify_blocks: m must be >= w");
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::domain_error("classify_blocks: epsilon must be in (0, 1/2)");
  BlockMap bm;
  bm.m = m;
  bm.h = p.h;
  bm.epsilon = epsilon;
  bm.block_side = 2 * (m / 2) + 1;
  if (bm.block_side > p.h) throw std::domain_error("classify_blocks: block exceeds grid");
  bm.blocks_per_axis = p.h / bm.block_side;
  bm.wraps = bm.blocks_per_axis * bm.block_side == p.h;
  bm.bad.assign(std::size_t(bm.blocks_per_axis) * bm.blocks_per_axis, 0);

  const ThetaSums sums(g);
  const std::int32_t rB = m / 2;
  const std::int32_t rW = p.w / 2;
  const double threshold = std::pow(double(p.N()), 0.5 + epsilon);

  for (std::int32_t bi = 0; bi < bm.blocks_per_axis; ++bi) {
    for (std::int32_t bj = 0; bj < bm.blocks_per_axis; ++bj) {
      const std::int32_t cR = bm.center_row(bi), cC = bm.center_col(bj);
      bool bad = false;
      // Every window center whose floor(w/2)-neighborhood meets the block.
      for (std::int32_t vr = cR - rB - rW; vr <= cR + rB + rW && !bad; ++vr) {
        const std::int32_t r0 = std::max(cR - rB, vr - rW);
        const std::int32_t r1 = std::min(cR + rB, vr + rW);
        for (std::int32_t vc = cC - rB - rW; vc <= cC + rB + rW; ++vc) {
          const std::int32_t c0 = std::max(cC - rB, vc - rW);
          const std::int32_t c1 = std::min(cC + rB, vc + rW);
          const std::int64_t area = std::int64_t(r1 - r0 + 1) * (c1 - c0 + 1);
          const std::int64_t wbar = area - sums.rect_torus(r0, c0, r1, c1);
          if (double(wbar) - double(area) / 2.0 >= threshold) {
            bad = true;
            break;
          }
        }
      }
      bm.bad[std::size_t(bi) * bm.blocks_per_axis + bj] = bad ? 1 : 0;
    }
  }
  return bm;
}

std::vector<BadCluster> bad_clusters(const BlockMap& bm) {
  const std::int32_t q = bm.blocks_per_axis;
  std::vector<std::int8_t> seen(std::size_t(q) * q, 0);
  std::vector<BadCluster> out;
  for (std::int32_t bi = 0; bi < q; ++bi) {
    for (std::int32_t bj = 0; bj < q; ++bj) {
      if (!bm.is_bad(bi, bj) || seen[std::size_t(bi) * q + bj]) continue;
      BadCluster cl;
      std::deque<std::pair<std::int32_t, std::int32_t>> queue{{bi, bj}};
      seen[std::size_t(bi) * q + bj] = 1;
      while (!queue.empty()) {
        auto [ci, cj] = queue.front();
        queue.pop_front();
        cl.blocks.emplace_back(ci, cj);
        for (std::int32_t di = -1; di <= 1; ++di) {
          for (std::int32_t dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            std::int32_t ni = ci + di, nj = cj + dj;
            if (bm.wraps) {
              ni = wrap(ni, q);
              nj = wrap(nj, q);
            } else if (ni < 0 || ni >= q || nj < 0 || nj >= q) {
              continue;
            }
            if (!bm.is_bad(ni, nj) || seen[std::size_t(ni) * q + nj]) continue;
            seen[std::size_t(ni) * q + nj] = 1;
            queue.emplace_back(ni, nj);
          }
        }
      }
      std::sort(cl.blocks.begin(), cl.blocks.end());
      cl.anchor = cl.blocks.front();
      for (const auto& b : cl.blocks) {
        const std::int32_t dr = bm.wraps ? torus_axis_dist(b.first, cl.anchor.first, q)
                                         : std::abs(b.first - cl.anchor.first);
        const std::int32_t dc = bm.wraps ? torus_axis_dist(b.second, cl.anchor.second, q)
                                         : std::abs(b.second - cl.anchor.second);
        cl.radius = std::max(cl.radius, std::max(dr, dc));
      }
      out.push_back(std::move(cl));
    }
  }
  return out;
}

std::vector<std::int32_t> bad_cluster_radii(const BlockMap& bm) {
  std::vector<std::int32_t> out;
  for (const auto& cl : bad_clusters(bm)) out.push_back(cl.radius);
  return out;
}

// ---------------------------------------------------------------------------
// Radical and p-stable regions

namespace {
void check_epsilons(double epsilon, double epsilon_prime) {
  if (!(epsilon > 0.0 && epsilon < 0.5) || !(epsilon_prime > 0.0 && epsilon_prime < 0.5))
    throw std::domain_error("epsilon and epsilon_prime must be in (0, 1/2)");
}
}  // namespace

bool is_radical_region(const TorusGrid& g, const ThetaSums& sums,
                       std::int64_t center, double epsilon, double epsilon_prime) {
  check_epsilons(epsilon, epsilon_prime);
  const Params& p = g.params();
  const std::int32_t R = std::int32_t((1.0 + epsilon_prime) * p.w);
  if (2 * R + 1 > p.h)
    throw std::domain_error("is_radical_region: region wraps around the torus");
  const std::int32_t r = std::int32_t(center / p.h), c = std::int32_t(center % p.h);
  const std::int64_t theta = sums.rect_torus(r - R, c - R, r + R, c + R);
  const double tau = double(p.tauN) / p.N();
  const double tau_hat = tau * (1.0 - 1.0 / (tau * std::pow(double(p.N()), 0.5 - epsilon)));
  const double stretch = (1.0 + epsilon_prime) * (1.0 + epsilon_prime);
  return double(theta) < tau_hat * stretch * p.N();
}

bool is_radical_region(const TorusGrid& g, std::int64_t center, double epsilon,
                       double epsilon_prime) {
  return is_radical_region(g, ThetaSums(g), center, epsilon, epsilon_prime);
}

std::pair<std::int64_t, bool> count_p_stable_region(const TorusGrid& g,
                                                    const NeighborhoodCounts& cnt,
                                                    std::int64_t center,
                                                    double epsilon,
                                                    double epsilon_prime) {
  check_epsilons(epsilon, epsilon_prime);
  const Params& p = g.params();
  const std::int32_t R = std::int32_t(epsilon_prime * p.w);
  const std::int32_t r = std::int32_t(center / p.h), c = std::int32_t(center % p.h);
  std::int64_t count = 0;
  for (std::int32_t dr = -R; dr <= R; ++dr) {
    for (std::int32_t dc = -R; dc <= R; ++dc) {
      const std::int64_t v =
          std::int64_t(wrap(r + dr, p.h)) * p.h + wrap(c + dc, p.h);
      if (g.get(v) && is_p_stable(p, cnt, v)) ++count;
    }
  }
  const double tau = double(p.tauN) / p.N();
  const double thr = std::floor(tau * epsilon_prime * epsilon_prime * p.N() -
                                std::pow(double(p.N()), 0.5 + epsilon));
  return {count, thr <= 0.0 || double(count) >= thr};
}

// ---------------------------------------------------------------------------
// Regions of expansion and cascades

bool is_region_of_expansion(const TorusGrid& g, const ThetaSums& sums,
                            std::int64_t center, std::int32_t radius) {
  const Params& p = g.params();
  const std::int32_t h = p.h, w = p.w, N = p.N();
  const std::int32_t rB = w / 2;  // w-block radius
  if (2 * radius + 1 > h)
    throw std::domain_error("is_region_of_expansion: region wraps around the torus");
  const std::int32_t cr = std::int32_t(center / h), cc = std::int32_t(center % h);

  for (std::int32_t vr = cr - (radius - rB); vr <= cr + (radius - rB); ++vr) {
    for (std::int32_t vc = cc - (radius - rB); vc <= cc + (radius - rB); ++vc) {
      // Ring = one layer around the block.
      for (std::int32_t dr = -rB - 1; dr <= rB + 1; ++dr) {
        for (std::int32_t dc = -rB - 1; dc <= rB + 1; ++dc) {
          if (std::max(std::abs(dr), std::abs(dc)) != rB + 1) continue;
          const std::int32_t xr = vr + dr, xc = vc + dc;
          if (!g.get(wrap(xr, h), wrap(xc, h))) continue;
          // theta-count of x, minus the block theta-particles it would lose
          const std::int64_t k =
              sums.rect_torus(xr - w, xc - w, xr + w, xc + w);
          const std::int64_t lost = sums.rect_torus(
              std::max(xr - w, vr - rB), std::max(xc - w, vc - rB),
              std::min(xr + w, vr + rB), std::min(xc + w, vc + rB));
          const std::int64_t k_hyp = k - lost;
          if (!(k_hyp < p.tauN && N - k_hyp + 1 >= p.tauN)) return false;
        }
      }
    }
  }
  return true;
}

bool is_region_of_expansion(const TorusGrid& g, std::int64_t center,
                            std::int32_t radius) {
  return is_region_of_expansion(g, ThetaSums(g), center, radius);
}

std::vector<std::int64_t> cascade_closure(const TorusGrid& g,
                                          const std::vector<std::uint8_t>& allowed,
                                          bool side_theta) {
  TorusGrid work = g;
  NeighborhoodCounts cnt = build_counts(work);
  const Params& p = work.params();
  const std::int64_t n = work.size();
  auto eligible = [&](std::int64_t u) {
    return allowed[std::size_t(u)] && work.get(u) == side_theta &&
           is_p_stable(p, cnt, u);
  };
  std::vector<std::uint8_t> queued(std::size_t(n), 0);
  std::deque<std::int64_t> queue;
  for (std::int64_t u = 0; u < n; ++u) {
    if (eligible(u)) {
      queued[std::size_t(u)] = 1;
      queue.push_back(u);
    }
  }
  std::vector<std::int64_t> out;
  const std::int32_t h = p.h, w = p.w;
  while (!queue.empty()) {
    const std::int64_t u = queue.front();
    queue.pop_front();
    // Eligibility is monotone while u keeps its side state, so this only
    // filters nodes the closure itself has already flipped.
    if (!eligible(u)) continue;
    apply_flip(work, cnt, u);
    out.push_back(u);
    const std::int32_t r = std::int32_t(u / h), c = std::int32_t(u % h);
    for (std::int32_t dr = -w; dr <= w; ++dr) {
      for (std::int32_t dc = -w; dc <= w; ++dc) {
        const std::int64_t v =
            std::int64_t(wrap(r + dr, h)) * h + wrap(c + dc, h);
        if (!queued[std::size_t(v)] && eligible(v)) {
          queued[std::size_t(v)] = 1;
          queue.push_back(v);
        }
      }
    }
  }
  return out;
}

ExpandableReport is_expandable_region(const TorusGrid& g, const BlockMap& bm,
                                      const BadCluster& cluster) {
  ExpandableReport rep;
  if (cluster.blocks.empty()) return rep;
  const Params& p = g.params();
  const std::int32_t h = p.h;
  rep.center_node = std::int64_t(bm.center_row(cluster.anchor.first)) * h +
                    bm.center_col(cluster.anchor.second);

  std::vector<std::uint8_t> nodes(std::size_t(h) * h, 0);
  const std::int32_t rB = bm.block_side / 2;
  for (const auto& [bi, bj] : cluster.blocks) {
    const std::int32_t cR = bm.center_row(bi), cC = bm.center_col(bj);
    for (std::int32_t r = cR - rB; r <= cR + rB; ++r)
      for (std::int32_t c = cC - rB; c <= cC + rB; ++c)
        nodes[std::size_t(wrap(r, h)) * h + wrap(c, h)] = 1;
  }
  const std::int32_t margin = p.N() / 4;
  std::vector<std::uint8_t> x1 = dilate_cheb(nodes, h, margin);
  const std::vector<std::uint8_t> x2_outer = dilate_cheb(nodes, h, 2 * margin);
  std::vector<std::uint8_t> x2(x1.size());
  for (std::size_t i = 0; i < x2.size(); ++i) x2[i] = x2_outer[i] && !x1[i];
  for (auto v : x1) rep.x1_size += v;
  for (auto v : x2) rep.x2_size += v;

  rep.flips = cascade_closure(g, x1, true);

  TorusGrid after = g;
  NeighborhoodCounts cnt = build_counts(after);
  for (const std::int64_t u : rep.flips) apply_flip(after, cnt, u);
  for (std::int64_t u = 0; u < after.size(); ++u) {
    if (x2[std::size_t(u)] && is_theta_affected(after, cnt, u)) {
      rep.affected_node = u;
      rep.expandable = true;
      break;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Firewalls

FirewallReport verify_firewall(const TorusGrid& g, double center_row,
                               double center_col, double r) {
  const Params& p = g.params();
  const std::int32_t h = p.h, w = p.w;
  if (r < 3.0 * w) throw std::domain_error("verify_firewall: needs r >= 3w");
  FirewallReport rep;
  rep.r_at_least_w_cubed = r >= double(w) * w * w;
  {
    const double tau = double(p.tauN) / p.N();
    static const double tau_star = solve_tau_star();
    rep.tau_in_theory_range = tau > tau_star && tau < 0.5;
  }

  const double lo = std::max(r - std::sqrt(2.0) * w, 0.0);
  const double lo2 = lo * lo, hi2 = r * r;
  auto disp = [&](double x, double cx) {
    double d = std::fmod(x - cx, double(h));
    if (d > h / 2.0) d -= h;
    if (d < -h / 2.0) d += h;
    return d;
  };
  auto d2_of = [&](std::int32_t row, std::int32_t col) {
    const double dr = disp(row, center_row), dc = disp(col, center_col);
    return dr * dr + dc * dc;
  };
  auto in_disc = [&](std::int32_t row, std::int32_t col) {
    return d2_of(row, col) <= hi2;
  };

  // First pass: annulus monochromaticity and the interior flag.
  bool have_state = false;
  bool interior_ok = true;
  std::vector<std::int64_t> annulus;
  for (std::int32_t row = 0; row < h; ++row) {
    for (std::int32_t col = 0; col < h; ++col) {
      const double d2 = d2_of(row, col);
      if (d2 > hi2) continue;
      const std::int64_t u = std::int64_t(row) * h + col;
      if (d2 >= lo2) {
        if (!have_state) {
          rep.annulus_state = g.get(u);
          have_state = true;
        } else if (g.get(u) != rep.annulus_state) {
          rep.violating_node = u;
          rep.annulus_size = std::int64_t(annulus.size()) + 1;
          return rep;  // ok stays false
        }
        annulus.push_back(u);
      }
    }
  }
  rep.annulus_size = std::int64_t(annulus.size());
  if (!have_state) return rep;  // empty annulus, nothing to certify
  for (std::int32_t row = 0; row < h && interior_ok; ++row) {
    for (std::int32_t col = 0; col < h; ++col) {
      if (d2_of(row, col) < lo2 && g.get(row, col) != rep.annulus_state) {
        interior_ok = false;
        break;
      }
    }
  }
  rep.ok = true;
  rep.interior_monochromatic = interior_ok;

  // Worst case: every site outside the closed disc is adversarial.
  std::int64_t min_worst = p.N();
  for (const std::int64_t u : annulus) {
    const std::int32_t row = std::int32_t(u / h), col = std::int32_t(u % h);
    std::int64_t worst = 0;
    for (std::int32_t dr = -w; dr <= w; ++dr) {
      for (std::int32_t dc = -w; dc <= w; ++dc) {
        const std::int32_t vr = wrap(row + dr, h), vc = wrap(col + dc, h);
        if (!in_disc(vr, vc)) continue;
        if (g.get(vr, vc) == rep.annulus_state) ++worst;
      }
    }
    min_worst = std::min(min_worst, worst);
  }
  // Stability needs k >= tauN, so any positive margin certifies the annulus.
  rep.margin = min_worst - p.tauN + 1;
  return rep;
}

// ---------------------------------------------------------------------------
// Balance property

bool balance_property(const TorusGrid& g, std::int64_t nbhd_center,
                      std::int32_t nbhd_radius, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::domain_error("balance_property: epsilon must be in (0, 1/2)");
  const Params& p = g.params();
  const std::int32_t h = p.h;
  if (2 * nbhd_radius + 1 > h)
    throw std::domain_error("balance_property: neighborhood wraps around the torus");
  const std::int32_t L = std::int32_t(std::ceil(std::pow(double(p.w), 0.25)));
  const double threshold = std::pow(double(p.w), 0.125 + epsilon);
  const std::int32_t cr = std::int32_t(nbhd_center / h);
  const std::int32_t cc = std::int32_t(nbhd_center % h);

  // One orientation at a time; the other is the transpose.
  for (int orient = 0; orient < 2; ++orient) {
    for (std::int32_t a = -nbhd_radius; a <= nbhd_radius; ++a) {
      for (std::int32_t s = -nbhd_radius - L + 1; s <= nbhd_radius; ++s) {
        const std::int32_t b0 = std::max(s, -nbhd_radius);
        const std::int32_t b1 = std::min(s + L - 1, nbhd_radius);
        const std::int32_t len = b1 - b0 + 1;
        std::int32_t wbar = 0;
        for (std::int32_t b = b0; b <= b1; ++b) {
          const std::int32_t row = orient == 0 ? cr + a : cr + b;
          const std::int32_t col = orient == 0 ? cc + b : cc + a;
          if (!g.get(wrap(row, h), wrap(col, h))) ++wbar;
        }
        if (double(wbar) - double(len) / 2.0 >= threshold) return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Scanning and reports

const char* region_kind_name(RegionKind k) {
  switch (k) {
    case RegionKind::good_block: return "good_block";
    case RegionKind::bad_block: return "bad_block";
    case RegionKind::radical: return "radical";
    case RegionKind::p_stable_region: return "p_stable_region";
    case RegionKind::expandable: return "expandable";
    case RegionKind::firewall: return "firewall";
    case RegionKind::region_of_expansion: return "region_of_expansion";
  }
  return "?";
}

std::optional<std::pair<std::int64_t, std::int32_t>> nearest_region_scan(
    const TorusGrid& g, RegionKind kind, std::int64_t from,
    std::int32_t max_radius, double epsilon, double epsilon_prime) {
  const Params& p = g.params();
  const std::int32_t h = p.h;
  const std::int32_t fr = std::int32_t(from / h), fc = std::int32_t(from % h);

  if (kind == RegionKind::radical) {
    const ThetaSums sums(g);
    const std::int32_t dmax = std::min(max_radius, (h - 1) / 2);
    for (std::int32_t d = 0; d <= dmax; ++d) {
      // Ring of Chebyshev distance d, walked top row, bottom row, sides.
      auto try_node = [&](std::int32_t r, std::int32_t c)
          -> std::optional<std::pair<std::int64_t, std::int32_t>> {
        const std::int64_t u = std::int64_t(wrap(r, h)) * h + wrap(c, h);
        if (is_radical_region(g, sums, u, epsilon, epsilon_prime))
          return std::make_pair(u, d);
        return std::nullopt;
      };
      if (d == 0) {
        if (auto hit = try_node(fr, fc)) return hit;
        continue;
      }
      for (std::int32_t c = fc - d; c <= fc + d; ++c)
        if (auto hit = try_node(fr - d, c)) return hit;
      for (std::int32_t c = fc - d; c <= fc + d; ++c)
        if (auto hit = try_node(fr + d, c)) return hit;
      for (std::int32_t r = fr - d + 1; r <= fr + d - 1; ++r) {
        if (auto hit = try_node(r, fc - d)) return hit;
        if (auto hit = try_node(r, fc + d)) return hit;
      }
    }
    return std::nullopt;
  }

  if (kind == RegionKind::expandable) {
    const BlockMap bm = classify_blocks(g, p.N(), epsilon);
    std::optional<std::pair<std::int64_t, std::int32_t>> best;
    for (const auto& cl : bad_clusters(bm)) {
      const ExpandableReport rep = is_expandable_region(g, bm, cl);
      if (!rep.expandable) continue;
      const std::int32_t cr2 = std::int32_t(rep.center_node / h);
      const std::int32_t cc2 = std::int32_t(rep.center_node % h);
      const std::int32_t d = std::max(torus_axis_dist(cr2, fr, h),
                                      torus_axis_dist(cc2, fc, h));
      if (d > max_radius) continue;
      if (!best || d < best->second ||
          (d == best->second && rep.center_node < best->first))
        best = std::make_pair(rep.center_node, d);
    }
    return best;
  }

  throw std::domain_error("nearest_region_scan: kind must be radical or expandable");
}

std::string region_report_lines(const std::vector<RegionReport>& reports) {
  std::string out;
  for (const auto& rep : reports) {
    nlohmann::json j;
    j["kind"] = region_kind_name(rep.kind);
    j["center"] = rep.center;
    j["radius_or_size"] = rep.radius_or_size;
    j["certificate"] = rep.certificate;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_blockmap_pgm(const BlockMap& bm, const std::string& path) {
  std::vector<std::uint8_t> pixels(bm.bad.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = bm.bad[i] ? 0 : 255;
  save_pgm(pixels, bm.blocks_per_axis, bm.blocks_per_axis, path);
}

}  // namespace schelling
