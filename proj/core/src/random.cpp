#include "spdc/random.hpp"

#include <cmath>
#include <numbers>

namespace spdc {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (label + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::exponential(double rate) noexcept { return -std::log(uniform_open0()) / rate; }

double Rng::laplace(double rate) noexcept {
  const double magnitude = exponential(rate);
  return (engine_() & 1U) ? magnitude : -magnitude;
}

std::pair<double, double> Rng::normal_pair() noexcept {
  const double radius = std::sqrt(-2.0 * std::log(uniform_open0()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace spdc
