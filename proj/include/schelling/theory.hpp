#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace schelling {

struct TheoryParams {
  std::int32_t N = 0;
  std::int32_t tauN = 0;
  double epsilon = 0.25;
  double epsilon_prime = 0.25;

  double tau() const { return double(tauN) / N; }
};

// H(x) = -x log2 x - (1-x) log2 (1-x), with H(0) = H(1) = 0.
double binary_entropy(double x);

// p_u = 2^-(N-1) * sum_{k=0}^{tauN-2} C(N-1, k): the probability that a
// fresh i.i.d. site is theta-affected. Exact big-integer evaluation up to
// N = 4096 (w <= 25 fits, the largest radius exercised here), log-space
// beyond; the two agree to 1e-10 relative where both run.
struct PAffected {
  bool zero = false;    // tauN < 2: empty sum
  bool exact = false;   // big-integer path ran
  double log2_value = 0.0;
  double value = 0.0;   // 2^log2_value (0 on underflow)
  std::string numerator;              // decimal digits, exact path only
  std::int32_t denominator_pow2 = 0;  // p = numerator / 2^denominator_pow2
};
PAffected p_affected_exact(std::int32_t tauN, std::int32_t N);

// e(tau) = [3(tau-1/2) + sqrt(9(tau-1/2)^2 - 7(tau-1/2)(3tau+1/2))]
//          / (2(3tau+1/2)), for tau in (0, 1/2).
double e_of_tau(double tau);

// Root of 5(1+e(tau))^2 - 6 = 0 in (0.4, 0.5), approximately 0.488.
double solve_tau_star();
// Root of 3/4 (1 - H(4tau/3)) - (1 - H(tau)) = 0 in (0.35, 0.5), approx 0.433.
double solve_tau_lower_star();

// Final-size exponents a(tau) = (1-H)(2-(1+e)^2), b(tau) = (1+e)^2 (1-H);
// tau > 1/2 is evaluated at tau_bar = 1 - tau + 2/N (N required then).
struct SizeExponents {
  double a = 0.0, b = 0.0;
  double tau_used = 0.0;
  bool used_tau_bar = false;
};
SizeExponents size_exponents(double tau, std::int32_t N = 0);

struct DerivedTaus {
  double tau_prime = 0.0;         // (tauN - 2) / (N - 1)
  double tau_double_prime = 0.0;  // (floor(tau_hat (1+e')^2 N) - 1) / ((1+e')^2 N)
  double tau_hat = 0.0;           // tau (1 - 1 / (tau N^(1/2-e)))
  double tau_bar = 0.0;           // 1 - tau + 2/N
};
DerivedTaus derived_taus(const TheoryParams& tp);

// Exponential scales of the race construction, in log2 form (the raw values
// overflow every native type at real N). The asymptotic o(N) corrections
// are exposed as slack knobs defaulting to 0; log^{3/2} terms use natural
// logs, a conventional choice recorded here.
struct ScaleOptions {
  double epsilon_dprime = 0.0;  // the formulas' eps'' slack
  double c_exponent = 1.0;      // fluctuation exponent in N^C sqrt(rho') log^{3/2} rho'
  double slack = 0.0;           // +- o(N) allowance on the radical exponent
};
struct ScaleFormulas {
  double log2_rho = 0.0;
  double log2_rho_prime = 0.0;
  double log2_rho_double_prime = 0.0;
  double log2_L = 0.0;        // meaningful only when L_denominator_positive
  double log2_L_prime = 0.0;
  bool L_denominator_positive = false;
  double radical_exponent_lo = 0.0;  // per-N rate, -(1-H(tau''))(1+e')^2 -+ slack
  double radical_exponent_hi = 0.0;
  bool race_meaningful = false;  // epsilon_prime > e(tau)
  bool used_tau_bar = false;
  double tau_used = 0.0;
};
ScaleFormulas scale_formulas(const TheoryParams& tp, const ScaleOptions& opt = {});

// Everything above for one parameter set, as a JSON document.
nlohmann::json theory_table(double tau_tilde, std::int32_t w, double epsilon,
                            double epsilon_prime);

// CSV "tau,a,b" sampled on grid_points interior points of (tau*, 1/2).
std::string exponent_curve_csv(std::int32_t grid_points);

}  // namespace schelling
