#pragma once

// Log-space arithmetic for quantities far outside double range, plus the
// regularized incomplete gamma function (for chi-square tail probabilities).

#include <cmath>
#include <limits>
#include <stdexcept>

namespace schelling {

// log2(2^a + 2^b)
inline double log2_add(double a, double b) {
  if (std::isinf(a) && a < 0) return b;
  if (std::isinf(b) && b < 0) return a;
  double hi = a > b ? a : b;
  double lo = a > b ? b : a;
  return hi + std::log2(1.0 + std::exp2(lo - hi));
}

// log2(2^a - 2^b), requires a > b
inline double log2_sub(double a, double b) {
  if (std::isinf(b) && b < 0) return a;
  if (!(a > b)) throw std::domain_error("log2_sub: needs a > b");
  double d = 1.0 - std::exp2(b - a);
  return a + std::log2(d);
}

// Regularized lower incomplete gamma P(s, x) by series / continued fraction.
inline double gamma_p(double s, double x) {
  if (x < 0.0 || s <= 0.0) throw std::domain_error("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  double lg = std::lgamma(s);
  if (x < s + 1.0) {
    // series expansion
    double sum = 1.0 / s, term = sum, ap = s;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + s * std::log(x) - lg);
  }
  // Lentz continued fraction for Q(s, x)
  const double tiny = 1e-300;
  double b = x + 1.0 - s, c = 1.0 / tiny, d = 1.0 / b, hval = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    hval *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  double q = std::exp(-x + s * std::log(x) - lg) * hval;
  return 1.0 - q;
}

// Survival function of chi-square with df degrees of freedom.
inline double chi_square_sf(double stat, int df) {
  if (df <= 0) throw std::domain_error("chi_square_sf: df must be positive");
  if (stat <= 0.0) return 1.0;
  return 1.0 - gamma_p(0.5 * df, 0.5 * stat);
}

}  // namespace schelling
