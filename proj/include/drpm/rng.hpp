#ifndef DRPM_RNG_HPP
#define DRPM_RNG_HPP

#include <cstdint>
#include <random>

namespace drpm {

/// Explicit random source. Wraps a 64-bit Mersenne twister and draws
/// uniforms from its top 53 bits so streams are reproducible across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for (seed, index); used for per-sample streams in
  /// Monte-Carlo loops so results do not depend on the worker count.
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform();

  /// Standard Gumbel(0, 1) by inverse CDF, u clamped to [1e-12, 1 - 1e-12].
  double gumbel();

  /// Uniform integer in [0, bound).
  int uniform_int(int bound) { return static_cast<int>(uniform() * bound); }

  /// Normal(0, 1) by Box-Muller on two uniforms.
  double normal();

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer, used to derive seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace drpm

#endif  // DRPM_RNG_HPP
