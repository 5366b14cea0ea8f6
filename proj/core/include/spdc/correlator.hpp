#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "spdc/tag_stream.hpp"

namespace spdc::corr {

enum class CorrelogramMode {
  StartStop,         ///< nearest following / preceding stop per start event
  WindowedPairwise,  ///< every pair inside the lag window
};

struct CorrelogramConfig {
  double bin_width = 3e-9;  ///< seconds, whole picoseconds
  double max_lag = 100e-9;  ///< seconds
  CorrelogramMode mode = CorrelogramMode::StartStop;

  void validate() const;
  std::int64_t bin_width_ps() const;
  /// K, with bins indexed -K..K and K = ceil(max_lag / bin_width).
  std::int64_t half_bins() const;
  std::size_t bin_count() const { return static_cast<std::size_t>(2 * half_bins() + 1); }
};

/// Delay histogram. Bin k is centred on k * bin_width; a delay lying exactly
/// on an edge belongs to the bin closer to zero, which keeps the layout
/// mirror-symmetric.
struct Correlogram {
  std::vector<double> bin_edges;  ///< seconds, size bin_count + 1
  std::vector<std::uint64_t> counts;
  /// Number of integer tick delays mapped to each bin. With a tick that does
  /// not divide the bin width this alternates between neighbouring values.
  std::vector<std::int64_t> bin_ticks;
  std::int64_t tick_ps = 1;
  std::uint64_t n_a = 0;
  std::uint64_t n_b = 0;
  double span = 0.0;  ///< seconds
  CorrelogramConfig config;
  bool autocorrelation = false;

  double bin_center(std::size_t i) const noexcept { return 0.5 * (bin_edges[i] + bin_edges[i + 1]); }
};

/// Normalized g2(tau) with per-bin Poisson standard errors.
struct G2Curve {
  std::vector<double> tau;    ///< bin centres, seconds
  std::vector<double> g2;
  std::vector<double> sigma;  ///< standard error of g2
  std::vector<std::uint64_t> counts;
  double bin_width = 0.0;  ///< seconds; 0 marks point samples rather than bin averages
  /// Delay interval each bin actually covers on the tick grid (optional; the
  /// fit falls back to tau +- bin_width / 2 when empty).
  std::vector<double> bin_lo;
  std::vector<double> bin_hi;

  std::size_t size() const noexcept { return tau.size(); }
};

/// Maps an integer tick delay onto a bin index in [-K, K].
class BinMapper {
 public:
  BinMapper(std::int64_t tick_ps, std::int64_t bin_width_ps, std::int64_t half_bins);

  std::optional<std::int64_t> index(std::int64_t delay_ticks) const noexcept;
  /// Inclusive tick-delay range that can land in any bin.
  std::int64_t max_delay() const noexcept { return max_delay_; }
  /// Inclusive range [first, last] of tick delays mapped to bin k; empty
  /// (first > last) when the tick is coarser than the bin.
  std::pair<std::int64_t, std::int64_t> delay_range(std::int64_t k) const noexcept;

 private:
  std::int64_t tick_ps_;
  std::int64_t width_ps_;
  std::int64_t half_bins_;
  std::int64_t max_delay_;
};

/// tau = t_b - t_a. Inputs must be sorted and share one tick length.
Correlogram cross_correlogram(const TagStream& a, const TagStream& b, const CorrelogramConfig& cfg);

/// Same stream on both sides; a tag is never paired with itself.
Correlogram auto_correlogram(const TagStream& a, const CorrelogramConfig& cfg);

/// g2 = counts / (n_a n_b w_k / span), with w_k the delay span bin k covers
/// on the tick grid (bin_ticks * tick). Empty bins get the one-count error;
/// bins that cover no tick delay get g2 = 0 and an infinite error.
G2Curve normalize_g2(const Correlogram& h);

/// Number of a-tags with at least one b-tag inside +-window/2.
std::uint64_t coincidences(const TagStream& a, const TagStream& b, double window);

struct ConditionedSurface {
  std::vector<double> axis;  ///< bin centres of t_s - t_i, seconds
  std::vector<std::uint64_t> numerator;  ///< row-major [s1 bin][s2 bin]
  std::vector<double> denominator;
};

struct ConditionedG2 {
  G2Curve curve;                     ///< diagonal tau = t_s1 - t_s2
  std::vector<double> denominator;   ///< expected triples for uncorrelated signal arms
  std::uint64_t heralds = 0;         ///< idler tags
  std::uint64_t heralded_events = 0; ///< idler tags with >= 1 signal tag in the interval
  std::uint64_t triples = 0;         ///< (idler, s1, s2) triples inside the interval
  std::optional<ConditionedSurface> surface;
};

/// Idler-conditioned autocorrelation of the two signal detectors.
///
/// Numerator: (t_s1 - t_s2) histogram over all s1/s2 tags within
/// [t_i - herald_halfwidth, t_i + herald_halfwidth] of the same idler tag.
/// Denominator: the same histogram predicted from the measured per-detector
/// offset distributions around the idler, so uncorrelated arms give g2_c = 1.
ConditionedG2 conditioned_g2(const TagStream& s1, const TagStream& s2, const TagStream& idler,
                             double herald_halfwidth, const CorrelogramConfig& cfg,
                             bool with_surface = false);

/// Globally time-ordered (channel, tick) sequence. Ties go to the lower channel id.
std::vector<TagEvent> merge_streams(std::span<const TagStream> streams);

}  // namespace spdc::corr
