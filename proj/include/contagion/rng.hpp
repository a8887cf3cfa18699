#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "contagion/common.hpp"

namespace contagion {

/// SplitMix64 output function.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based child seed: the same (parent, keys) path always yields the
/// same seed, independent of how many other streams were derived before it.
constexpr Seed derive_seed(Seed parent, std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = mix64(parent);
  for (const std::uint64_t k : keys) {
    h = mix64(h ^ mix64(k ^ 0x6a09e667f3bcc909ULL));
  }
  return h;
}

/// Stream tags used as the first key of derive_seed.
enum class Stream : std::uint64_t {
  network = 1,
  theta = 2,
  shock = 3,
  threshold = 4,
  schedule = 5,
  check = 6,
};

constexpr std::uint64_t key(Stream s) noexcept { return static_cast<std::uint64_t>(s); }

/// mt19937_64 with hand-written uniform and normal transforms, so that draws
/// are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(Seed seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo == hi ? lo : lo + (hi - lo) * uniform(); }

  double sample(const RangeDistribution& dist) { return uniform(dist.lo, dist.hi); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal, Marsaglia polar method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace contagion
