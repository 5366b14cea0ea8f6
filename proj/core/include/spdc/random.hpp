#pragma once

#include <cstdint>
#include <random>
#include <utility>

namespace spdc {

/// Mixes a base seed with a stream label (splitmix64 finalizer), so that
/// each generator stage draws from its own reproducible sequence.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) noexcept;

/// Random source with hand-written variate transforms.
///
/// The standard library leaves the algorithms behind std::*_distribution
/// unspecified, so streams would differ between toolchains. Only the engine
/// (whose output is fully specified) comes from <random>.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open0() noexcept { return 1.0 - uniform(); }

  double exponential(double rate) noexcept;

  /// Symmetric two-sided exponential with density (rate/2) exp(-rate |x|).
  double laplace(double rate) noexcept;

  /// Pair of independent standard normals (Box-Muller).
  std::pair<double, double> normal_pair() noexcept;

  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::uint64_t bits() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace spdc
