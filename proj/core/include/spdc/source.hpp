#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "spdc/tag_stream.hpp"

namespace spdc::sim {

inline constexpr std::uint8_t kIdlerChannel = 0;
inline constexpr std::uint8_t kSignal1Channel = 1;
inline constexpr std::uint8_t kSignal2Channel = 2;

enum class SourceModel {
  /// Homogeneous Poisson pair emission; flat signal autocorrelation.
  PairPoisson,
  /// Sum of n independent thermal (Ornstein-Uhlenbeck field) pair processes;
  /// signal autocorrelation peaks at 1 + 1/n.
  ClusteredMultimode,
};

/// Statistics of the pair source before any detector.
struct SourceParams {
  double pair_rate = 0.0;  ///< pairs per second
  double gamma = 0.0;      ///< cross-correlation decay rate [1/s]; bandwidth = gamma / 2 pi
  int n_modes = 1;
  /// Auto-correlation intensity decay rate [1/s]; gamma / 2 when unset.
  std::optional<double> gamma_auto;
  SourceModel model = SourceModel::PairPoisson;

  double bandwidth_hz() const noexcept;
  double auto_decay_rate() const noexcept { return gamma_auto.value_or(gamma / 2.0); }
  void validate() const;

  static double gamma_from_bandwidth(double bandwidth_hz) noexcept;
};

/// Imperfect single-photon detector: thinning, dark counts, non-paralyzable
/// dead time, and timestamp quantization.
struct DetectorParams {
  double efficiency = 1.0;  ///< probability in [0, 1]
  double dead_time = 0.0;   ///< seconds
  double dark_rate = 0.0;   ///< counts per second
  double tick = 162e-12;    ///< seconds; must be a whole number of picoseconds

  std::int64_t tick_ps() const;
  void validate() const;

  static DetectorParams ideal(double tick = 162e-12) { return DetectorParams{1.0, 0.0, 0.0, tick}; }
};

struct SimConfig {
  double duration = 1.0;  ///< seconds
  std::uint64_t seed = 0;
  SourceParams source;
  DetectorParams idler_detector;
  DetectorParams signal1_detector;
  DetectorParams signal2_detector;
  double splitter_ratio = 0.5;      ///< probability a signal photon goes to s1
  std::int64_t ideal_tick_ps = 1;   ///< resolution of the pre-detection streams

  void validate() const;
};

struct PairStreams {
  TagStream signal;
  TagStream idler;
};

struct DetectedStreams {
  TagStream idler;
  TagStream signal1;
  TagStream signal2;
};

/// PairPoisson generator: Poisson origination times of rate R; the signal
/// photon sits at the origination time and the idler precedes it by a
/// Laplace-distributed delay with density (gamma/2) exp(-gamma |d|).
/// Times wrap periodically into the observation span so every signal tag has
/// exactly one idler partner.
PairStreams simulate_pairs(const SimConfig& cfg);

/// ClusteredMultimode generator. Each of n_modes sub-processes emits pairs at
/// mean rate R/n with instantaneous rate proportional to |a(t)|^2, where a(t) is
/// a stationary complex Ornstein-Uhlenbeck amplitude whose correlation decays
/// at gamma_auto / 2. Pair delays as in simulate_pairs.
PairStreams simulate_clustered(const SimConfig& cfg);

/// Dispatches on cfg.source.model.
PairStreams simulate_source(const SimConfig& cfg);

/// quantize -> dead-time filter applied to merge(thin(ideal, efficiency), dark counts).
/// With dead_time > 0, output tags differ pairwise by strictly more than the
/// dead time; dead_time = 0 disables the filter (tags may share a tick).
TagStream apply_detector(const TagStream& ideal, const DetectorParams& det, std::uint64_t seed);

/// Independent per-photon routing: s1 with probability `ratio`, else s2.
std::pair<TagStream, TagStream> split_beam(const TagStream& signal, double ratio, std::uint64_t seed);

/// Full chain: source, 50:50-style split of the signal arm, one detector per channel.
DetectedStreams simulate_experiment(const SimConfig& cfg);

}  // namespace spdc::sim
