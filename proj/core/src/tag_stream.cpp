#include "spdc/tag_stream.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spdc/error.hpp"

namespace spdc {

double TagStream::rate() const noexcept {
  const double span = span_seconds();
  return span > 0.0 ? static_cast<double>(tags.size()) / span : 0.0;
}

bool is_sorted(std::span<const std::int64_t> tags) noexcept {
  return std::is_sorted(tags.begin(), tags.end());
}

void validate_stream(const TagStream& stream) {
  if (stream.tick_ps <= 0) throw ConfigError("tag stream tick must be positive");
  if (stream.span_ticks < 0) throw ConfigError("tag stream span must be non-negative");
  if (!is_sorted(stream.tags)) {
    throw ContractError("tag stream on channel " + std::to_string(stream.channel) + " is not sorted");
  }
  if (!stream.tags.empty() && (stream.tags.front() < 0 || stream.tags.back() > stream.span_ticks)) {
    throw ContractError("tag stream on channel " + std::to_string(stream.channel) +
                        " has tags outside [0, span]");
  }
}

void require_same_tick(const TagStream& a, const TagStream& b) {
  if (a.tick_ps != b.tick_ps) {
    throw FormatError("tick mismatch: channel " + std::to_string(a.channel) + " uses " +
                      std::to_string(a.tick_ps) + " ps, channel " + std::to_string(b.channel) +
                      " uses " + std::to_string(b.tick_ps) + " ps");
  }
}

std::int64_t round_half_down(double value) noexcept {
  return static_cast<std::int64_t>(std::ceil(value - 0.5));
}

std::int64_t tick_ps_from_seconds(double tick_seconds) {
  if (!(tick_seconds > 0.0)) throw ConfigError("tick must be positive");
  const double ps = tick_seconds * 1e12;
  const double whole = std::round(ps);
  if (whole < 1.0 || std::abs(ps - whole) > 1e-6 * whole) {
    throw ConfigError("tick must be a whole number of picoseconds, got " + std::to_string(ps) + " ps");
  }
  return static_cast<std::int64_t>(whole);
}

}  // namespace spdc
