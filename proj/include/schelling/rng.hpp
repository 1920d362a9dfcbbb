#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace schelling {

// Counter-based generator: output i of a stream is a pure function of
// (master seed, stream tag, i). Streams never collide, draws can be
// replayed or skipped, and parallel consumers stay deterministic.
//
// Stream tags used by this project:
//   kGridStream     site states of a fresh grid (counter = site index)
//   kClockStream    waiting-time draws of a simulation (counter = draw index)
//   kReplicaStream  per-replica sub-keys (counter = replica index)
inline constexpr std::uint64_t kGridStream = 1;
inline constexpr std::uint64_t kClockStream = 2;
inline constexpr std::uint64_t kReplicaStream = 3;

inline std::uint64_t mix64(std::uint64_t x) {
  // SplitMix64 finalizer; full-period bijection on 64-bit words.
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derive an independent sub-key. Used for stream and replica splitting.
inline std::uint64_t derive_key(std::uint64_t key, std::uint64_t tag) {
  return mix64(key ^ mix64(tag + 0x632be59bd9b4e019ULL));
}

class CounterRng {
 public:
  CounterRng() = default;
  CounterRng(std::uint64_t master_seed, std::uint64_t stream_tag)
      : key_(derive_key(master_seed, stream_tag)) {}

  static CounterRng from_key(std::uint64_t key) {
    CounterRng r;
    r.key_ = key;
    return r;
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return ctr_; }

  std::uint64_t next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++ctr_); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Rejection against the last partial block keeps the draw unbiased.
    const std::uint64_t limit = n * ((~0ULL) / n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  double next_exponential(double rate) {
    // next_double() < 1 strictly, so the log argument stays positive.
    return -std::log1p(-next_double()) / rate;
  }

  double next_normal() {
    // Box-Muller, one value per call (the pair's second half is dropped to
    // keep draw counts easy to reason about).
    double u1 = next_double(), u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Marsaglia-Tsang; shape >= 1 handled directly, shape < 1 by boosting.
  double next_gamma(double shape, double scale) {
    if (shape < 1.0) {
      const double u = next_double();
      return next_gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = next_normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = next_double();
      if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v * scale;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t ctr_ = 0;
};

// Waiting-time law F for the flip clocks. Every supported law has
// F(x) = 0 for x <= 0, is not a point mass, and has a finite exponential
// moment, which is what the termination and skeleton arguments require.
struct WaitingTimeDist {
  enum class Kind { exponential, uniform, shifted_gamma };

  Kind kind = Kind::exponential;
  double rate = 1.0;             // exponential
  double a = 0.0, b = 0.0;       // uniform, 0 < a < b
  double shape = 1.0, scale = 1.0, shift = 0.0;  // shifted_gamma
  double truncate_at = 0.0;      // optional transform t -> min(t, cap); 0 = off

  static WaitingTimeDist exponential(double rate) {
    WaitingTimeDist d;
    d.kind = Kind::exponential;
    d.rate = rate;
    d.validate();
    return d;
  }
  static WaitingTimeDist uniform(double a, double b) {
    WaitingTimeDist d;
    d.kind = Kind::uniform;
    d.a = a;
    d.b = b;
    d.validate();
    return d;
  }
  static WaitingTimeDist shifted_gamma(double shape, double scale, double shift) {
    WaitingTimeDist d;
    d.kind = Kind::shifted_gamma;
    d.shape = shape;
    d.scale = scale;
    d.shift = shift;
    d.validate();
    return d;
  }

  void validate() const {
    switch (kind) {
      case Kind::exponential:
        if (!(rate > 0.0)) throw std::domain_error("waiting time: rate must be > 0");
        break;
      case Kind::uniform:
        if (!(0.0 < a && a < b)) throw std::domain_error("waiting time: need 0 < a < b");
        break;
      case Kind::shifted_gamma:
        if (!(shape > 0.0) || !(scale > 0.0) || shift < 0.0)
          throw std::domain_error("waiting time: need shape > 0, scale > 0, shift >= 0");
        break;
    }
    if (truncate_at < 0.0) throw std::domain_error("waiting time: truncation cap must be >= 0");
  }

  double sample(CounterRng& rng) const {
    double t = 0.0;
    switch (kind) {
      case Kind::exponential:
        t = rng.next_exponential(rate);
        break;
      case Kind::uniform:
        t = a + (b - a) * rng.next_double();
        break;
      case Kind::shifted_gamma:
        t = shift + rng.next_gamma(shape, scale);
        break;
    }
    if (truncate_at > 0.0 && t > truncate_at) t = truncate_at;
    return t;
  }

  std::string kind_name() const {
    switch (kind) {
      case Kind::exponential: return "exponential";
      case Kind::uniform: return "uniform";
      case Kind::shifted_gamma: return "shifted_gamma";
    }
    return "?";
  }
};

}  // namespace schelling
