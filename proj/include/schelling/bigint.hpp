#pragma once

// Minimal unsigned bignum, base 2^32. Only the operations needed for exact
// binomial tail sums: add, multiply/divide by small values, compare, log2,
// decimal rendering. Division is exact-only (callers divide known factors).

#include <cassert>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace schelling {

class BigUint {
 public:
  BigUint() = default;
  explicit BigUint(std::uint64_t v) {
    if (v != 0) {
      limbs_.push_back(static_cast<std::uint32_t>(v));
      if (v >> 32) limbs_.push_back(static_cast<std::uint32_t>(v >> 32));
    }
  }

  bool is_zero() const { return limbs_.empty(); }

  void add(const BigUint& o) {
    if (limbs_.size() < o.limbs_.size()) limbs_.resize(o.limbs_.size(), 0);
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
      std::uint64_t s = carry + limbs_[i];
      if (i < o.limbs_.size()) s += o.limbs_[i];
      limbs_[i] = static_cast<std::uint32_t>(s);
      carry = s >> 32;
    }
    if (carry) limbs_.push_back(static_cast<std::uint32_t>(carry));
  }

  void mul_small(std::uint32_t m) {
    if (m == 0) {
      limbs_.clear();
      return;
    }
    std::uint64_t carry = 0;
    for (auto& limb : limbs_) {
      std::uint64_t p = static_cast<std::uint64_t>(limb) * m + carry;
      limb = static_cast<std::uint32_t>(p);
      carry = p >> 32;
    }
    while (carry) {
      limbs_.push_back(static_cast<std::uint32_t>(carry));
      carry >>= 32;
    }
  }

  // Requires that d divides *this exactly.
  void divexact_small(std::uint32_t d) {
    assert(d != 0);
    std::uint64_t rem = 0;
    for (std::size_t i = limbs_.size(); i-- > 0;) {
      std::uint64_t cur = (rem << 32) | limbs_[i];
      limbs_[i] = static_cast<std::uint32_t>(cur / d);
      rem = cur % d;
    }
    assert(rem == 0);
    trim();
  }

  int compare(const BigUint& o) const {
    if (limbs_.size() != o.limbs_.size())
      return limbs_.size() < o.limbs_.size() ? -1 : 1;
    for (std::size_t i = limbs_.size(); i-- > 0;) {
      if (limbs_[i] != o.limbs_[i]) return limbs_[i] < o.limbs_[i] ? -1 : 1;
    }
    return 0;
  }

  // log2 of the value, exact for powers of two, else a double approximation.
  double log2() const {
    assert(!is_zero());
    std::size_t top = limbs_.size() - 1;
    // Fold the top three limbs into a double; lower limbs are below 2^-53.
    double x = 0.0;
    for (std::size_t i = top + 1; i-- > (top >= 2 ? top - 2 : 0);) {
      x = x * 4294967296.0 + limbs_[i];
      if (i == 0) break;
    }
    std::size_t lo = top >= 2 ? top - 2 : 0;
    return std::log2(x) + 32.0 * static_cast<double>(lo);
  }

  // Value as double divided by 2^shift. Exact whenever the value fits in a
  // double's mantissa, otherwise truncated below the top 96 bits.
  double to_double_shifted(long shift) const {
    if (is_zero()) return 0.0;
    std::size_t top = limbs_.size() - 1;
    std::size_t lo = top >= 2 ? top - 2 : 0;
    double x = 0.0;
    for (std::size_t i = top + 1; i-- > lo;) {
      x = x * 4294967296.0 + limbs_[i];
      if (i == 0) break;
    }
    return std::ldexp(x, static_cast<int>(32 * static_cast<long>(lo) - shift));
  }

  std::string to_decimal() const {
    if (is_zero()) return "0";
    std::vector<std::uint32_t> work(limbs_);
    std::string out;
    while (!work.empty()) {
      std::uint64_t rem = 0;
      for (std::size_t i = work.size(); i-- > 0;) {
        std::uint64_t cur = (rem << 32) | work[i];
        work[i] = static_cast<std::uint32_t>(cur / 1000000000u);
        rem = cur % 1000000000u;
      }
      while (!work.empty() && work.back() == 0) work.pop_back();
      char buf[16];
      std::snprintf(buf, sizeof buf, work.empty() ? "%llu" : "%09llu",
                    static_cast<unsigned long long>(rem));
      out.insert(0, buf);
    }
    return out;
  }

 private:
  void trim() {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
  }

  std::vector<std::uint32_t> limbs_;  // little-endian, no trailing zeros
};

}  // namespace schelling
