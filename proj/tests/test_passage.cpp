#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "schelling/io.hpp"
#include "schelling/lattice.hpp"
#include "schelling/passage.hpp"
#include "schelling/rng.hpp"

using namespace schelling;

namespace {

const WaitingTimeDist kExp1 = WaitingTimeDist::exponential(1.0);

Params open_window(std::int32_t L) {
  return Params(L, 2, tau_quantize(0.45, 25), Boundary::open);
}

TorusGrid accepted_window(std::int32_t L, std::uint64_t seed, std::int32_t dots) {
  AcceptanceSampler s(open_window(L), seed, dots);
  return s.next();
}

std::vector<double> replay_clocks(const Params& p, std::uint64_t clock_seed) {
  CounterRng rng(clock_seed, kClockStream);
  std::vector<double> t(std::size_t(p.h) * p.h);
  for (double& v : t) v = kExp1.sample(rng);
  return t;
}

TorusGrid checkerboard(const Params& p, bool phase) {
  TorusGrid g(p, 0);
  for (std::int32_t r = 0; r < p.h; ++r)
    for (std::int32_t c = 0; c < p.h; ++c) g.set(r, c, (((r + c) & 1) != 0) == phase);
  return g;
}

}  // namespace

TEST_SUITE("passage") {

TEST_CASE("the modified dynamics needs an open window") {
  const Params torus(30, 2, 12, Boundary::torus);
  CHECK_THROWS_AS(ModifiedSim(new_random(torus, 1), kExp1, 2), std::invalid_argument);
}

TEST_CASE("a conditioned start is quiet until seeded") {
  const TorusGrid g = accepted_window(30, 11, 3);
  ModifiedSim sim(g, kExp1, 5);
  sim.run_modified(1000.0);
  CHECK(sim.flip_log().empty());
  const ArrivalField& f = sim.arrivals();
  for (double v : f.t) CHECK(std::isinf(v));
}

TEST_CASE("the seeded block is affected at time zero") {
  const TorusGrid g = accepted_window(40, 3, 3);
  ModifiedSim sim(g, kExp1, 7);
  const std::int64_t center = 20 * 40 + 20;
  sim.seed_affected_block(center);
  CHECK(sim.seed_center() == center);
  for (std::int32_t dr = -1; dr <= 1; ++dr)
    for (std::int32_t dc = -1; dc <= 1; ++dc)
      CHECK(sim.is_affected_star((20 + dr) * 40 + 20 + dc));
  CHECK_FALSE(sim.is_affected_star(20 * 40 + 23));

  sim.run_modified(0.0);
  const ArrivalField& f = sim.arrivals();
  for (std::int32_t dr = -1; dr <= 1; ++dr)
    for (std::int32_t dc = -1; dc <= 1; ++dc) CHECK(f.at(20 + dr, 20 + dc) == 0.0);
  CHECK(std::isinf(f.at(30, 30)));

  CHECK_THROWS_AS(sim.seed_affected_block(0), std::domain_error);
}

TEST_CASE("seeded occupants flip exactly at their standing clocks") {
  const Params p = open_window(40);
  const TorusGrid g = accepted_window(40, 3, 3);
  const std::vector<double> t = replay_clocks(p, 7);
  ModifiedSim sim(g, kExp1, 7);
  for (std::int64_t u = 0; u < g.size(); ++u) CHECK(sim.flip_time(u) == t[std::size_t(u)]);

  const std::int64_t center = 20 * 40 + 20;
  sim.seed_affected_block(center);
  sim.run_modified(1e9);
  for (std::int32_t dr = -1; dr <= 1; ++dr)
    for (std::int32_t dc = -1; dc <= 1; ++dc) {
      const std::int64_t u = (20 + dr) * 40 + 20 + dc;
      if (!g.get(u)) continue;  // theta-bar occupants are not seeded
      bool found = false;
      for (const FlipRecord& fr : sim.flip_log())
        if (fr.node == u) {
          found = true;
          CHECK(fr.time == t[std::size_t(u)]);
          CHECK(fr.new_state == false);
        }
      CHECK(found);
    }
}

TEST_CASE("every node flips at most once and the band stays frozen") {
  const TorusGrid g = accepted_window(40, 5, 3);
  ModifiedSim sim(g, kExp1, 13);
  sim.seed_affected_block(20 * 40 + 20);
  sim.run_modified(1e9);

  CHECK(sim.is_frozen(0));
  CHECK(sim.is_frozen(1 * 40 + 20));
  CHECK(sim.is_frozen(20 * 40 + 38));
  CHECK_FALSE(sim.is_frozen(2 * 40 + 2));

  std::set<std::int64_t> seen;
  for (const FlipRecord& fr : sim.flip_log()) {
    CHECK(seen.insert(fr.node).second);
    const std::int32_t r = std::int32_t(fr.node / 40), c = std::int32_t(fr.node % 40);
    CHECK(r >= 2);
    CHECK(r <= 37);
    CHECK(c >= 2);
    CHECK(c <= 37);
    CHECK_FALSE(sim.is_frozen(fr.node));
  }
  CHECK_FALSE(seen.empty());
}

TEST_CASE("staged horizons compose") {
  const TorusGrid g = accepted_window(36, 9, 3);
  ModifiedSim staged(g, kExp1, 21);
  staged.seed_affected_block(18 * 36 + 18);
  staged.run_modified(3.0);
  const std::size_t early_flips = staged.flip_log().size();
  staged.run_modified(8.0);

  ModifiedSim oneshot(g, kExp1, 21);
  oneshot.seed_affected_block(18 * 36 + 18);
  oneshot.run_modified(8.0);

  CHECK(staged.now() == oneshot.now());
  CHECK(staged.grid() == oneshot.grid());
  CHECK(staged.arrivals().t == oneshot.arrivals().t);
  REQUIRE(staged.flip_log().size() == oneshot.flip_log().size());
  CHECK(staged.flip_log().size() >= early_flips);
  for (std::size_t i = 0; i < staged.flip_log().size(); ++i)
    CHECK(staged.flip_log()[i].time == oneshot.flip_log()[i].time);

  // arrivals never regress as the horizon grows
  ModifiedSim longer(g, kExp1, 21);
  longer.seed_affected_block(18 * 36 + 18);
  longer.run_modified(3.0);
  const std::vector<double> at3 = longer.arrivals().t;
  longer.run_modified(8.0);
  for (std::size_t i = 0; i < at3.size(); ++i) {
    if (std::isfinite(at3[i])) CHECK(longer.arrivals().t[i] == at3[i]);
  }
}

TEST_CASE("block tiling is anchored on the seed") {
  const TorusGrid g = accepted_window(40, 3, 3);
  ModifiedSim sim(g, kExp1, 7);
  CHECK_THROWS_AS(build_renorm_fpp(sim), std::domain_error);  // not seeded yet

  const std::int64_t center = 20 * 40 + 20;
  sim.seed_affected_block(center);
  const RenormFPP rf = build_renorm_fpp(sim);
  CHECK(rf.block_side == 3);
  CHECK(rf.r0 == 1);
  CHECK(rf.c0 == 1);
  CHECK(rf.nbi == 13);
  CHECK(rf.nbj == 13);

  const auto seed_tile = rf.block_of(center);
  REQUIRE(seed_tile.has_value());
  // the seed block occupies one whole tile
  for (std::int32_t dr = -1; dr <= 1; ++dr)
    for (std::int32_t dc = -1; dc <= 1; ++dc)
      CHECK(rf.block_of((20 + dr) * 40 + 20 + dc) == seed_tile);
  CHECK_FALSE(rf.block_of(0 * 40 + 5).has_value());  // row 0 precedes the tiling

  // weights add the nine standing clocks of the tile
  const std::vector<double> t = replay_clocks(open_window(40), 7);
  const auto [bi, bj] = *seed_tile;
  double sum = 0.0;
  for (std::int32_t dr = -1; dr <= 1; ++dr)
    for (std::int32_t dc = -1; dc <= 1; ++dc) sum += t[std::size_t((20 + dr) * 40 + 20 + dc)];
  CHECK(rf.weight[std::size_t(bi) * rf.nbj + bj] ==
        doctest::Approx(sum).epsilon(1e-12));

  // tiles grazing the frozen band are unusable, interior tiles are not
  const auto edge_tile = rf.block_of(1 * 40 + 20);
  REQUIRE(edge_tile.has_value());
  CHECK_FALSE(rf.usable[std::size_t(edge_tile->first) * rf.nbj + edge_tile->second]);
  CHECK(rf.usable[std::size_t(bi) * rf.nbj + bj]);
}

TEST_CASE("oracle distances compose along tiles") {
  const TorusGrid g = accepted_window(40, 3, 3);
  ModifiedSim sim(g, kExp1, 7);
  const std::int64_t center = 20 * 40 + 20;
  sim.seed_affected_block(center);
  const RenormFPP rf = build_renorm_fpp(sim);
  auto wt = [&](std::int32_t bi, std::int32_t bj) {
    return rf.weight[std::size_t(bi) * rf.nbj + bj];
  };
  const auto [bi, bj] = *rf.block_of(center);

  // same tile: the weight itself
  CHECK(fpp_oracle_upper(rf, center, center - 1) == doctest::Approx(wt(bi, bj)));
  // one tile east: both endpoint weights
  const std::int64_t east = 20 * 40 + 23;
  CHECK(fpp_oracle_upper(rf, center, east) ==
        doctest::Approx(wt(bi, bj) + wt(bi, bj + 1)));
  // diagonal: the cheaper of the two corridors
  const std::int64_t diag = 23 * 40 + 23;
  const double via = std::min(wt(bi, bj + 1), wt(bi + 1, bj));
  CHECK(fpp_oracle_upper(rf, center, diag) ==
        doctest::Approx(wt(bi, bj) + via + wt(bi + 1, bj + 1)));
  // unusable endpoints give no bound
  CHECK(std::isinf(fpp_oracle_upper(rf, center, 1 * 40 + 20)));
}

TEST_CASE("acceptance sampling is reproducible and sound") {
  const Params p = open_window(30);
  AcceptanceSampler a(p, 42, 3);
  AcceptanceSampler b(p, 42, 3);
  const TorusGrid ga = a.next();
  CHECK(ga == b.next());
  CHECK(a.proposals() == b.proposals());
  CHECK(a.accepted() == 1);
  CHECK(a.proposals() >= 1);

  const NeighborhoodCounts cnt = build_counts(ga);
  CHECK(AcceptanceSampler::admissible(ga, cnt));
  CHECK_FALSE(window_has_affected_node(ga, cnt));
  CHECK(window_is_region_of_expansion(ga));

  // a defect-free checkerboard is accepted on the first try
  AcceptanceSampler pure(p, 17, 0);
  pure.next();
  CHECK(pure.proposals() == 1);
  CHECK(pure.accepted() == 1);

  const std::string log = a.acceptance_log();
  std::size_t lines = 0;
  for (char c : log)
    if (c == '\n') ++lines;
  CHECK(std::int64_t(lines) == a.proposals() + 1);  // header + one row each
  CHECK(log.rfind("proposal,accepted", 0) == 0);
}

TEST_CASE("window admissibility predicates") {
  const Params p = open_window(30);
  const TorusGrid cb = checkerboard(p, false);
  const NeighborhoodCounts cnt = build_counts(cb);
  CHECK_FALSE(window_has_affected_node(cb, cnt));
  CHECK(window_is_region_of_expansion(cb));

  // two theta-defects sharing a window leave a theta-affected node behind
  TorusGrid dotted = cb;
  REQUIRE(dotted.get(15 * 30 + 15));
  REQUIRE(dotted.get(15 * 30 + 17));
  dotted.set(15 * 30 + 15, false);
  dotted.set(15 * 30 + 17, false);
  CHECK(window_has_affected_node(dotted, build_counts(dotted)));
  // a single defect is absorbed
  TorusGrid one_dot = cb;
  one_dot.set(15 * 30 + 15, false);
  CHECK_FALSE(window_has_affected_node(one_dot, build_counts(one_dot)));

  TorusGrid all(p, 0);
  for (std::int64_t u = 0; u < all.size(); ++u) all.set(u, true);
  CHECK_FALSE(window_is_region_of_expansion(all));

  const Params torus(30, 2, 12, Boundary::torus);
  CHECK_THROWS_AS(window_is_region_of_expansion(new_random(torus, 1)),
                  std::invalid_argument);
}

TEST_CASE("a chebyshev cone reads back as a square") {
  const std::int32_t L = 101, mid = 50;
  ArrivalField f;
  f.rows = f.cols = L;
  f.t.assign(std::size_t(L) * L, 0.0);
  for (std::int32_t r = 0; r < L; ++r)
    for (std::int32_t c = 0; c < L; ++c)
      f.at(r, c) = double(std::max(std::abs(r - mid), std::abs(c - mid)));

  const Params p(L, 2, 12, Boundary::open);
  const std::int64_t origin = mid * L + mid;
  const ShapeStats s = shape_stats(f, 40.0, origin, p, 64);
  CHECK(s.valid);
  CHECK(s.level_set_size == 81 * 81);
  REQUIRE(s.radial.size() == 64);
  const double rmin = *std::min_element(s.radial.begin(), s.radial.end());
  const double rmax = *std::max_element(s.radial.begin(), s.radial.end());
  CHECK(rmin >= 40.0);
  CHECK(rmin <= 40.5);
  CHECK(rmax == doctest::Approx(std::sqrt(2.0) * 40.0).epsilon(1e-3));
  CHECK(s.anisotropy > 0.3);
  CHECK(s.anisotropy < 0.45);
  for (const double fr : s.fitted_radii) {
    CHECK(fr >= 0.95);
    CHECK(fr <= 1.45);
  }

  // the profile is scale free up to cell quantization
  const ShapeStats half = shape_stats(f, 20.0, origin, p, 64);
  for (std::size_t i = 0; i < 64; ++i)
    CHECK(std::fabs(half.fitted_radii[i] - s.fitted_radii[i]) <= 0.08);

  // touching the window edge invalidates the sample
  const ShapeStats edge = shape_stats(f, 49.0, origin, p, 64);
  CHECK_FALSE(edge.valid);

  CHECK_THROWS_AS(shape_stats(f, 0.0, origin, p, 64), std::invalid_argument);
  CHECK_THROWS_AS(shape_stats(f, 10.0, origin, p, 0), std::invalid_argument);

  const std::vector<std::uint8_t> in20 = level_set_pixels(f, 20.0);
  const std::vector<std::uint8_t> in40 = level_set_pixels(f, 40.0);
  std::int64_t n20 = 0, n40 = 0;
  for (std::size_t i = 0; i < in20.size(); ++i) {
    if (in20[i]) {
      ++n20;
      CHECK(in40[i]);  // level sets are nested
    }
    if (in40[i]) ++n40;
  }
  CHECK(n20 == 41 * 41);
  CHECK(n40 == 81 * 81);

  const nlohmann::json js = shape_stats_json(s);
  CHECK(js.at("level_set_size") == 81 * 81);
  CHECK(js.at("valid") == true);
}

TEST_CASE("concentration rows") {
  const std::int32_t L = 41, mid = 20;
  ArrivalField f;
  f.rows = f.cols = L;
  f.t.assign(std::size_t(L) * L, 0.0);
  for (std::int32_t r = 0; r < L; ++r)
    for (std::int32_t c = 0; c < L; ++c)
      f.at(r, c) = 3.0 * std::max(std::abs(r - mid), std::abs(c - mid));

  const std::int64_t origin = mid * L + mid;
  const std::vector<std::int64_t> targets = {mid * L + mid + 10, (mid + 5) * L + mid};
  const std::vector<ArrivalField> same = {f, f, f};
  const std::vector<ConcentrationRow> rows = concentration_stats(same, targets, origin);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].distance == 10.0);
  CHECK(rows[0].finite_samples == 3);
  CHECK(rows[0].mean == 30.0);
  CHECK(rows[0].stddev == 0.0);
  CHECK(rows[0].normalized == 0.0);
  CHECK(rows[1].distance == 5.0);
  CHECK(rows[1].samples.size() == 3);

  // replicas that never reach the target do not enter the statistics
  ArrivalField g = f;
  g.at(mid, mid + 10) = std::numeric_limits<double>::infinity();
  const std::vector<ArrivalField> mixed = {f, f, g};
  const std::vector<ConcentrationRow> rows2 = concentration_stats(mixed, {targets[0]}, origin);
  CHECK(rows2[0].finite_samples == 2);

  CHECK_THROWS_AS(concentration_stats({f}, targets, origin), std::domain_error);
  CHECK_THROWS_AS(concentration_stats(same, {origin + 1}, origin), std::invalid_argument);
}

TEST_CASE("renormalized bounds dominate the run") {
  const std::int32_t L = 36;
  const TorusGrid g = accepted_window(L, 29, 2);
  ModifiedSim sim(g, kExp1, 31);
  const std::int64_t center = 18 * L + 18;
  sim.seed_affected_block(center);
  const RenormFPP rf = build_renorm_fpp(sim);

  double far = 0.0;
  std::vector<double> bound(rf.weight.size(),
                            std::numeric_limits<double>::infinity());
  for (std::int32_t bi = 0; bi < rf.nbi; ++bi)
    for (std::int32_t bj = 0; bj < rf.nbj; ++bj) {
      if (!rf.usable[std::size_t(bi) * rf.nbj + bj]) continue;
      const std::int64_t cell =
          std::int64_t(rf.r0 + bi * 3 + 1) * L + (rf.c0 + bj * 3 + 1);
      const double b = fpp_oracle_upper(rf, center, cell);
      bound[std::size_t(bi) * rf.nbj + bj] = b;
      if (std::isfinite(b)) far = std::max(far, b);
    }
  REQUIRE(far > 0.0);

  const ArrivalField& f = sim.run_modified(far + 1.0);
  for (std::int32_t bi = 0; bi < rf.nbi; ++bi)
    for (std::int32_t bj = 0; bj < rf.nbj; ++bj) {
      const double b = bound[std::size_t(bi) * rf.nbj + bj];
      if (!std::isfinite(b)) continue;
      for (std::int32_t dr = 0; dr < 3; ++dr)
        for (std::int32_t dc = 0; dc < 3; ++dc)
          CHECK(f.at(rf.r0 + bi * 3 + dr, rf.c0 + bj * 3 + dc) <= b + 1e-9);
    }
}

}  // TEST_SUITE
