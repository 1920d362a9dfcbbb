#include "schelling/theory.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "schelling/bigint.hpp"
#include "schelling/lattice.hpp"
#include "schelling/numeric.hpp"

namespace schelling {

namespace {
constexpr std::int32_t kExactLimit = 4096;
constexpr double kLn2 = 0.6931471805599453;

// log2 C(n, k) via lgamma.
double log2_choose(std::int32_t n, std::int32_t k) {
  return (std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
          std::lgamma(double(n - k) + 1.0)) /
         kLn2;
}

double bisect(double lo, double hi, double (*f)(double), double tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  assert(flo * fhi < 0.0);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}
}  // namespace

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("binary_entropy: x must be in [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

PAffected p_affected_exact(std::int32_t tauN, std::int32_t N) {
  if (N < 1 || tauN < 1 || tauN > N) throw std::domain_error("p_affected_exact: bad (tauN, N)");
  PAffected out;
  out.denominator_pow2 = N - 1;
  if (tauN < 2) {
    out.zero = true;
    out.numerator = "0";
    out.value = 0.0;
    out.log2_value = -std::numeric_limits<double>::infinity();
    return out;
  }
  if (N <= kExactLimit) {
    // Running term C(N-1, k), multiplied up and divided down exactly.
    BigUint term(1), sum(1);
    for (std::int32_t k = 0; k + 1 <= tauN - 2; ++k) {
      term.mul_small(std::uint32_t(N - 1 - k));
      term.divexact_small(std::uint32_t(k + 1));
      sum.add(term);
    }
    out.exact = true;
    out.numerator = sum.to_decimal();
    out.log2_value = sum.log2() - double(N - 1);
    out.value = sum.to_double_shifted(N - 1);
  } else {
    double acc = -std::numeric_limits<double>::infinity();
    for (std::int32_t k = 0; k <= tauN - 2; ++k)
      acc = log2_add(acc, log2_choose(N - 1, k));
    out.log2_value = acc - double(N - 1);
    out.value = std::exp2(out.log2_value);
  }
  return out;
}

double e_of_tau(double tau) {
  if (!(tau > 0.0 && tau < 0.5))
    throw std::domain_error("e_of_tau: tau must be in (0, 1/2); use the tau_bar route above");
  const double d = tau - 0.5;
  const double q = 3.0 * tau + 0.5;
  const double disc = 9.0 * d * d - 7.0 * d * q;
  assert(disc >= 0.0);
  return (3.0 * d + std::sqrt(disc)) / (2.0 * q);
}

double solve_tau_star() {
  static const double root = bisect(0.4, 0.5 - 1e-12, +[](double t) {
    return 5.0 * std::pow(1.0 + e_of_tau(t), 2.0) - 6.0;
  }, 1e-9);
  return root;
}

double solve_tau_lower_star() {
  static const double root = bisect(0.35, 0.5, +[](double t) {
    return 0.75 * (1.0 - binary_entropy(4.0 * t / 3.0)) - (1.0 - binary_entropy(t));
  }, 1e-9);
  return root;
}

SizeExponents size_exponents(double tau, std::int32_t N) {
  SizeExponents out;
  out.tau_used = tau;
  if (tau == 0.5) throw std::domain_error("size_exponents: tau = 1/2 is excluded");
  if (tau > 0.5) {
    if (N <= 0)
      throw std::invalid_argument("size_exponents: tau > 1/2 needs N for the tau_bar map");
    out.tau_used = 1.0 - tau + 2.0 / N;
    out.used_tau_bar = true;
  }
  const double ts = solve_tau_star();
  if (!(out.tau_used > ts && out.tau_used < 0.5)) {
    throw std::domain_error("size_exponents: tau outside (tau*, 1 - tau*), tau* = " +
                            std::to_string(ts));
  }
  const double oneMinusH = 1.0 - binary_entropy(out.tau_used);
  const double g = std::pow(1.0 + e_of_tau(out.tau_used), 2.0);
  out.a = oneMinusH * (2.0 - g);
  out.b = g * oneMinusH;
  return out;
}

DerivedTaus derived_taus(const TheoryParams& tp) {
  DerivedTaus d;
  const double tau = tp.tau();
  const double N = tp.N;
  d.tau_prime = double(tp.tauN - 2) / (tp.N - 1);
  d.tau_hat = tau * (1.0 - 1.0 / (tau * std::pow(N, 0.5 - tp.epsilon)));
  const double stretch = (1.0 + tp.epsilon_prime) * (1.0 + tp.epsilon_prime);
  d.tau_double_prime = (std::floor(d.tau_hat * stretch * N) - 1.0) / (stretch * N);
  d.tau_bar = 1.0 - tau + 2.0 / N;
  return d;
}

ScaleFormulas scale_formulas(const TheoryParams& tp, const ScaleOptions& opt) {
  ScaleFormulas out;
  const double N = tp.N;
  double tau = tp.tau();
  if (tau > 0.5) {
    tau = 1.0 - tau + 2.0 / N;
    out.used_tau_bar = true;
  }
  out.tau_used = tau;
  const double H = binary_entropy(tau);
  const double stretch = (1.0 + tp.epsilon_prime) * (1.0 + tp.epsilon_prime);
  const double e2 = opt.epsilon_dprime;

  out.log2_rho = 0.5 * (1.0 - H + e2 / 2.0) * stretch * N;
  out.log2_rho_prime = (1.0 - H - e2) * (1.0 - 0.5 * stretch) * N + 2.0 * std::log2(N);
  out.log2_rho_double_prime = (1.0 - H + e2) * (stretch - 1.0) * N;

  // L = ceil(rho / (rho'/4 - 2 N^C sqrt(rho') log^{3/2} rho' - N)),
  // L' = ceil(2 N^C sqrt(rho') log^{3/2} rho' + N); the ceilings shift the
  // log2 values by less than one ulp at these magnitudes.
  const double log2_fluct = 1.0 + opt.c_exponent * std::log2(N) +
                            0.5 * out.log2_rho_prime +
                            1.5 * std::log2(out.log2_rho_prime * kLn2);
  out.log2_L_prime = log2_add(log2_fluct, std::log2(N));
  const double quarter = out.log2_rho_prime - 2.0;
  if (quarter > out.log2_L_prime) {
    out.L_denominator_positive = true;
    out.log2_L = out.log2_rho - log2_sub(quarter, out.log2_L_prime);
  }

  if (tau > 0.0 && tau < 0.5) out.race_meaningful = tp.epsilon_prime > e_of_tau(tau);
  TheoryParams routed = tp;
  if (out.used_tau_bar) routed.tauN = std::int32_t(std::lround(tau * N));
  const double tau_dp = derived_taus(routed).tau_double_prime;
  const double rate = -(1.0 - binary_entropy(std::min(std::max(tau_dp, 0.0), 1.0))) * stretch;
  out.radical_exponent_lo = rate - opt.slack;
  out.radical_exponent_hi = rate + opt.slack;
  return out;
}

nlohmann::json theory_table(double tau_tilde, std::int32_t w, double epsilon,
                            double epsilon_prime) {
  const std::int32_t N = (2 * w + 1) * (2 * w + 1);
  const std::int32_t tauN = tau_quantize(tau_tilde, N);
  TheoryParams tp{N, tauN, epsilon, epsilon_prime};

  nlohmann::json j;
  j["inputs"] = {{"tau_tilde", tau_tilde}, {"w", w},     {"N", N},
                 {"tauN", tauN},           {"tau", tp.tau()},
                 {"epsilon", epsilon},     {"epsilon_prime", epsilon_prime}};
  j["entropy"] = binary_entropy(tp.tau());
  j["tau_star"] = solve_tau_star();
  j["tau_lower_star"] = solve_tau_lower_star();

  const DerivedTaus d = derived_taus(tp);
  j["derived"] = {{"tau_prime", d.tau_prime},
                  {"tau_double_prime", d.tau_double_prime},
                  {"tau_hat", d.tau_hat},
                  {"tau_bar", d.tau_bar}};

  const PAffected pa = p_affected_exact(tauN, N);
  j["p_affected"] = {{"zero", pa.zero},
                     {"exact", pa.exact},
                     {"log2", pa.log2_value},
                     {"value", pa.value},
                     {"denominator_pow2", pa.denominator_pow2}};
  if (pa.exact) j["p_affected"]["numerator"] = pa.numerator;

  const double tau_for_e = tp.tau() <= 0.5 ? tp.tau() : d.tau_bar;
  if (tau_for_e > 0.0 && tau_for_e < 0.5) {
    j["e_of_tau"] = e_of_tau(tau_for_e);
    j["e_evaluated_at_tau_bar"] = tp.tau() > 0.5;
  }
  try {
    const SizeExponents se = size_exponents(tp.tau(), N);
    j["size_exponents"] = {{"a", se.a},
                           {"b", se.b},
                           {"tau_used", se.tau_used},
                           {"used_tau_bar", se.used_tau_bar}};
  } catch (const std::exception& ex) {
    j["size_exponents"] = {{"error", ex.what()}};
  }

  const ScaleFormulas sf = scale_formulas(tp);
  j["scales"] = {{"log2_rho", sf.log2_rho},
                 {"log2_rho_prime", sf.log2_rho_prime},
                 {"log2_rho_double_prime", sf.log2_rho_double_prime},
                 {"log2_L", sf.log2_L},
                 {"log2_L_prime", sf.log2_L_prime},
                 {"L_denominator_positive", sf.L_denominator_positive},
                 {"radical_exponent_lo", sf.radical_exponent_lo},
                 {"radical_exponent_hi", sf.radical_exponent_hi},
                 {"race_meaningful", sf.race_meaningful},
                 {"used_tau_bar", sf.used_tau_bar}};
  return j;
}

std::string exponent_curve_csv(std::int32_t grid_points) {
  if (grid_points < 1) throw std::domain_error("exponent_curve_csv: need at least one point");
  const double lo = solve_tau_star(), hi = 0.5;
  std::string out = "tau,a,b\n";
  for (std::int32_t i = 0; i < grid_points; ++i) {
    const double tau = lo + (hi - lo) * (i + 0.5) / grid_points;
    const SizeExponents se = size_exponents(tau);
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", tau, se.a, se.b);
    out += buf;
  }
  return out;
}

}  // namespace schelling
