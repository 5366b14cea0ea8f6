#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spdc {

/// Photon detection timestamps from one channel, in integer ticks.
///
/// The tick length is an integer number of picoseconds so that streams from
/// different sources can be compared for compatibility exactly. Tags are
/// non-decreasing and lie within [0, span_ticks].
struct TagStream {
  std::uint8_t channel = 0;
  std::int64_t tick_ps = 1;
  std::int64_t span_ticks = 0;
  std::vector<std::int64_t> tags;

  double tick_seconds() const noexcept { return static_cast<double>(tick_ps) * 1e-12; }
  double span_seconds() const noexcept { return static_cast<double>(span_ticks) * tick_seconds(); }
  std::size_t size() const noexcept { return tags.size(); }
  bool empty() const noexcept { return tags.empty(); }
  /// Mean count rate over the observation span (0 for a zero span).
  double rate() const noexcept;
};

/// One record of a merged multi-channel sequence.
struct TagEvent {
  std::uint8_t channel = 0;
  std::int64_t tick = 0;

  friend bool operator==(const TagEvent&, const TagEvent&) = default;
};

bool is_sorted(std::span<const std::int64_t> tags) noexcept;

/// Throws ContractError if tags are unsorted or outside the span, and
/// ConfigError for a non-positive tick.
void validate_stream(const TagStream& stream);

/// Throws FormatError unless both streams share the same tick length.
void require_same_tick(const TagStream& a, const TagStream& b);

/// Rounds to the nearest integer; exact halves go toward negative infinity.
std::int64_t round_half_down(double value) noexcept;

/// Converts a tick length in seconds to whole picoseconds. Throws ConfigError
/// when the value is not positive or not (within 1e-6 relative) a whole number
/// of picoseconds.
std::int64_t tick_ps_from_seconds(double tick_seconds);

}  // namespace spdc
