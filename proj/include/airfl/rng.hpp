#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace airfl {

/// Deterministic random source. All sampling goes through explicit
/// transforms of raw 64-bit draws so that a (seed, call sequence) pair
/// produces bit-identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (pairs cached).
  double normal();

  /// Circularly symmetric complex normal with unit total variance,
  /// i.e. real and imaginary parts are independent N(0, 1/2).
  std::complex<double> complex_normal();

  /// Independent stream derived from this generator's seed and a key.
  /// Forking does not consume state from the parent.
  Rng fork(std::uint64_t key) const { return Rng(derive_seed(seed_, key)); }

  std::uint64_t seed() const { return seed_; }

  /// splitmix64-style mixing of (base, key) into a fresh seed.
  static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t key);

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace airfl
