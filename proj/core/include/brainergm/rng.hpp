#pragma once

#include <cstdint>
#include <random>

namespace brainergm {

/// SplitMix64 finalizer; maps (master seed, stream index) to well-separated
/// seeds for independent generators.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// 64-bit Mersenne Twister with the few draws the samplers need.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// A generator for stream `stream` of this generator's master seed.
  static Rng stream(std::uint64_t master, std::uint64_t stream) {
    return Rng(derive_seed(master, stream));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on 0..bound-1; bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform() < p; }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace brainergm
