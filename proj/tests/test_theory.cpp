#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "doctest.h"
#include "schelling/lattice.hpp"
#include "schelling/numeric.hpp"
#include "schelling/rng.hpp"
#include "schelling/theory.hpp"

using namespace schelling;

namespace {

// log2 of C(n, k) via lgamma
double log2_choose(std::int32_t n, std::int32_t k) {
  return (std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) /
         std::log(2.0);
}

double log2_affected_sum(std::int32_t tauN, std::int32_t N) {
  double acc = -std::numeric_limits<double>::infinity();
  for (std::int32_t k = 0; k <= tauN - 2; ++k) acc = log2_add(acc, log2_choose(N - 1, k));
  return acc - (N - 1);
}

}  // namespace

TEST_SUITE("theory") {

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.25) == doctest::Approx(0.8112781244591328).epsilon(1e-14));
  for (const double x : {0.1, 0.2, 0.37, 0.44})
    CHECK(binary_entropy(x) == doctest::Approx(binary_entropy(1.0 - x)).epsilon(1e-14));
  CHECK_THROWS_AS(binary_entropy(-0.1), std::domain_error);
  CHECK_THROWS_AS(binary_entropy(1.1), std::domain_error);
}

TEST_CASE("affected-site probability, exact arithmetic") {
  const PAffected p = p_affected_exact(5, 9);
  CHECK(p.exact);
  CHECK_FALSE(p.zero);
  CHECK(p.numerator == "93");
  CHECK(p.denominator_pow2 == 8);
  CHECK(p.value == 93.0 / 256.0);
  CHECK(p.log2_value == doctest::Approx(std::log2(93.0 / 256.0)).epsilon(1e-14));

  const PAffected lo = p_affected_exact(2, 9);
  CHECK(lo.numerator == "1");
  CHECK(lo.value == 1.0 / 256.0);

  const PAffected hi = p_affected_exact(9, 9);
  CHECK(hi.numerator == "255");
  CHECK(hi.value == 255.0 / 256.0);

  const PAffected z = p_affected_exact(1, 9);
  CHECK(z.zero);
  CHECK(z.value == 0.0);

  // monotone in the threshold
  double prev = 0.0;
  for (std::int32_t t = 2; t <= 25; ++t) {
    const double v = p_affected_exact(t, 25).value;
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("exact and log-space evaluations agree") {
  const PAffected mid = p_affected_exact(186, 441);
  CHECK(mid.exact);
  CHECK(mid.log2_value ==
        doctest::Approx(log2_affected_sum(186, 441)).epsilon(1e-10));

  const std::int32_t bigN = 8281;  // w = 45, beyond the exact-path cap
  const std::int32_t t = tau_quantize(0.42, bigN);
  const PAffected big = p_affected_exact(t, bigN);
  CHECK_FALSE(big.exact);
  CHECK(big.log2_value == doctest::Approx(log2_affected_sum(t, bigN)).epsilon(1e-9));
}

TEST_CASE("critical densities") {
  const double ts = solve_tau_star();
  CHECK(ts > 0.487);
  CHECK(ts < 0.489);
  const double e = e_of_tau(ts);
  CHECK(std::fabs(5.0 * (1.0 + e) * (1.0 + e) - 6.0) <= 1e-8);
  auto f = [](double tau) {
    const double ee = e_of_tau(tau);
    return 5.0 * (1.0 + ee) * (1.0 + ee) - 6.0;
  };
  CHECK(f(ts - 0.005) * f(ts + 0.005) < 0.0);

  const double tl = solve_tau_lower_star();
  CHECK(tl > 0.432);
  CHECK(tl < 0.434);
  CHECK(std::fabs(0.75 * (1.0 - binary_entropy(4.0 * tl / 3.0)) -
                  (1.0 - binary_entropy(tl))) <= 1e-8);
  CHECK(tl < ts);
}

TEST_CASE("drift coefficient") {
  // closed form at tau = 0.45, recomputed from scratch
  const double x = 0.45 - 0.5;
  const double disc = 9.0 * x * x - 7.0 * x * (3.0 * 0.45 + 0.5);
  const double want = (3.0 * x + std::sqrt(disc)) / (2.0 * (3.0 * 0.45 + 0.5));
  CHECK(e_of_tau(0.45) == doctest::Approx(want).epsilon(1e-15));
  CHECK(e_of_tau(0.45) == doctest::Approx(0.18068521005).epsilon(1e-10));
  // discriminant is positive on the whole interval, e is positive
  for (double tau = 0.01; tau < 0.4999; tau += 0.007) {
    const double e = e_of_tau(tau);
    CHECK(std::isfinite(e));
    CHECK(e > 0.0);
  }
  CHECK_THROWS_AS(e_of_tau(0.0), std::domain_error);
  CHECK_THROWS_AS(e_of_tau(0.5), std::domain_error);
}

TEST_CASE("size exponents and the mass identity") {
  const double ts = solve_tau_star();
  for (const double tau : {ts + 1e-6, 0.49, 0.495, 0.4999}) {
    const SizeExponents se = size_exponents(tau);
    CHECK_FALSE(se.used_tau_bar);
    const double mass = 2.0 * (1.0 - binary_entropy(tau));
    CHECK(se.a + se.b == doctest::Approx(mass).epsilon(1e-12));
    const double e = e_of_tau(tau);
    CHECK(se.b == doctest::Approx((1.0 + e) * (1.0 + e) * (1.0 - binary_entropy(tau)))
                      .epsilon(1e-12));
    CHECK(se.b > se.a);  // (1+e)^2 > 1 splits the mass unevenly
  }

  // tau above one half routes through the complementary threshold
  const SizeExponents bar = size_exponents(0.51, 441);
  CHECK(bar.used_tau_bar);
  CHECK(bar.tau_used == doctest::Approx(1.0 - 0.51 + 2.0 / 441.0).epsilon(1e-15));
  const SizeExponents direct = size_exponents(bar.tau_used);
  CHECK(bar.a == direct.a);
  CHECK(bar.b == direct.b);

  CHECK_THROWS_AS(size_exponents(0.51), std::invalid_argument);  // needs N
  CHECK_THROWS_AS(size_exponents(0.3), std::domain_error);   // below tau*
  CHECK_THROWS_AS(size_exponents(0.5), std::domain_error);
}

TEST_CASE("derived thresholds") {
  const TheoryParams tp{441, 186, 0.25, 0.25};
  const DerivedTaus d = derived_taus(tp);
  CHECK(d.tau_prime == doctest::Approx(184.0 / 440.0).epsilon(1e-15));
  CHECK(d.tau_bar == doctest::Approx((441.0 - 186.0 + 2.0) / 441.0).epsilon(1e-15));

  const double tau = 186.0 / 441.0;
  const double tau_hat = tau * (1.0 - 1.0 / (tau * std::pow(441.0, 0.25)));
  CHECK(d.tau_hat == doctest::Approx(tau_hat).epsilon(1e-13));
  CHECK(d.tau_hat < tau);

  const double s = 1.25 * 1.25 * 441.0;
  CHECK(d.tau_double_prime ==
        doctest::Approx((std::floor(tau_hat * s) - 1.0) / s).epsilon(1e-13));
}

TEST_CASE("scale formulas") {
  // the race scales are astronomically large; only their logs are usable
  TheoryParams tp{4004001, tau_quantize(0.42, 4004001), 0.25, 0.25};
  const ScaleFormulas sf = scale_formulas(tp);
  CHECK(sf.log2_rho > 0.0);
  CHECK(sf.log2_rho_prime > 0.0);
  CHECK(sf.log2_rho_prime < sf.log2_rho);
  CHECK(sf.log2_rho_double_prime > 0.0);
  CHECK(sf.L_denominator_positive);
  CHECK(sf.log2_L > 0.0);
  CHECK(sf.log2_L_prime < sf.log2_rho_prime);
  CHECK(sf.race_meaningful);  // 0.25 > e(0.42)
  CHECK(sf.radical_exponent_lo == sf.radical_exponent_hi);
  CHECK(sf.radical_exponent_lo < 0.0);

  ScaleOptions opt;
  opt.slack = 0.5;
  const ScaleFormulas slacked = scale_formulas(tp, opt);
  CHECK(slacked.radical_exponent_hi - slacked.radical_exponent_lo ==
        doctest::Approx(1.0).epsilon(1e-12));

  TheoryParams narrow = tp;
  narrow.epsilon_prime = 0.1;  // below e(0.42) ~ 0.222
  CHECK_FALSE(scale_formulas(narrow).race_meaningful);

  TheoryParams high{441, 231, 0.25, 0.25};  // tau = 0.5238
  const ScaleFormulas bar = scale_formulas(high);
  CHECK(bar.used_tau_bar);
  CHECK(bar.tau_used == doctest::Approx(1.0 - 231.0 / 441.0 + 2.0 / 441.0).epsilon(1e-14));
}

TEST_CASE("theory table and exponent curve") {
  const nlohmann::json j = theory_table(0.42, 10, 0.25, 0.25);
  CHECK(j.at("inputs").at("tauN") == 186);
  CHECK(j.at("inputs").at("N") == 441);
  CHECK(double(j.at("p_affected").at("value")) ==
        doctest::Approx(p_affected_exact(186, 441).value).epsilon(1e-15));
  CHECK(j.at("p_affected").at("exact") == true);
  CHECK(j.contains("size_exponents"));
  CHECK(double(j.at("tau_star")) == doctest::Approx(solve_tau_star()).epsilon(1e-12));

  const std::string csv = exponent_curve_csv(64);
  std::size_t lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 65);
  CHECK(csv.rfind("tau,a,b\n", 0) == 0);
  // every row satisfies the mass identity
  std::size_t pos = csv.find('\n') + 1;
  while (pos < csv.size()) {
    const char* row = csv.c_str() + pos;
    char* end = nullptr;
    const double tau = std::strtod(row, &end);
    const double a = std::strtod(end + 1, &end);
    const double b = std::strtod(end + 1, &end);
    CHECK(a + b == doctest::Approx(2.0 * (1.0 - binary_entropy(tau))).epsilon(1e-9));
    pos = csv.find('\n', pos) + 1;
  }
  CHECK_THROWS_AS(exponent_curve_csv(0), std::domain_error);
}

TEST_CASE("sampled affected frequency matches the closed form") {
  for (const std::int32_t w : {2, 3, 4}) {
    const std::int32_t stride = 2 * w + 1;
    const std::int32_t per_axis = w == 2 ? 50 : (w == 3 ? 36 : 28);
    const std::int32_t h = stride * per_axis;
    const std::int32_t N = stride * stride;
    for (const double tt : {0.35, 0.42, 0.46}) {
      const std::int32_t tauN = tau_quantize(tt, N);
      const Params p(h, w, tauN, Boundary::torus);
      const double want = p_affected_exact(tauN, N).value;

      std::int64_t hits = 0, total = 0;
      for (std::uint64_t gs = 0; gs < 8; ++gs) {
        const TorusGrid g = new_random(p, 5000 + 17 * w + gs + std::uint64_t(tt * 100));
        const NeighborhoodCounts cnt = build_counts(g);
        for (std::int32_t i = 0; i < per_axis; ++i)
          for (std::int32_t j = 0; j < per_axis; ++j) {
            const std::int64_t u = std::int64_t(i * stride + w) * h + (j * stride + w);
            ++total;
            if (is_theta_affected(g, cnt, u)) ++hits;
          }
      }
      const double freq = double(hits) / double(total);
      const double se = std::sqrt(want * (1.0 - want) / double(total));
      INFO("w=" << w << " tau=" << tt << " freq=" << freq << " want=" << want);
      CHECK(std::fabs(freq - want) <= 4.0 * se);
    }
  }
}

TEST_CASE("log-space helpers and tail probabilities") {
  CHECK(log2_add(3.0, 3.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(log2_sub(4.0, 3.0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(log2_add(-std::numeric_limits<double>::infinity(), 2.0) == 2.0);
  CHECK_THROWS_AS(log2_sub(3.0, 4.0), std::domain_error);

  // chi-square with 2 df: SF(x) = exp(-x/2)
  CHECK(chi_square_sf(3.0, 2) == doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
  CHECK(chi_square_sf(0.0, 5) == 1.0);
  // median of chi-square(1) is about 0.4549
  CHECK(chi_square_sf(0.4549, 1) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(gamma_p(1.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(gamma_p(-1.0, 1.0), std::domain_error);
}

}  // TEST_SUITE
