#include <algorithm>
#include <cmath>
#include <iterator>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/random.hpp"
#include "spdc/source.hpp"

namespace spdc::sim {
namespace {

__extension__ using i128 = __int128;

// round_half_down(num / den) for den > 0, exactly.
std::int64_t rescale_ticks(std::int64_t tag, std::int64_t from_ps, std::int64_t to_ps) {
  const i128 num = 2 * static_cast<i128>(tag) * from_ps - to_ps;
  const i128 den = 2 * static_cast<i128>(to_ps);
  i128 q = num / den;
  if (num % den != 0 && num > 0) ++q;  // ceil for positive, truncation already ceils negatives
  return static_cast<std::int64_t>(q);
}

}  // namespace

std::int64_t DetectorParams::tick_ps() const { return tick_ps_from_seconds(tick); }

void DetectorParams::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw ConfigError("detector efficiency must lie in [0, 1]");
  if (!(dead_time >= 0.0) || !std::isfinite(dead_time)) throw ConfigError("dead_time must be >= 0");
  if (!(dark_rate >= 0.0) || !std::isfinite(dark_rate)) throw ConfigError("dark_rate must be >= 0");
  (void)tick_ps();
}

TagStream apply_detector(const TagStream& ideal, const DetectorParams& det, std::uint64_t seed) {
  det.validate();
  validate_stream(ideal);
  Rng rng(seed);

  std::vector<std::int64_t> thinned;
  thinned.reserve(static_cast<std::size_t>(static_cast<double>(ideal.size()) * det.efficiency * 1.01 + 16));
  if (det.efficiency >= 1.0) {
    thinned = ideal.tags;
  } else if (det.efficiency > 0.0) {
    for (std::int64_t tag : ideal.tags) {
      if (rng.uniform() < det.efficiency) thinned.push_back(tag);
    }
  }

  std::vector<std::int64_t> dark;
  if (det.dark_rate > 0.0) {
    const double tick_s = ideal.tick_seconds();
    const double span_s = ideal.span_seconds();
    for (double t = rng.exponential(det.dark_rate); t < span_s; t += rng.exponential(det.dark_rate)) {
      dark.push_back(std::min(round_half_down(t / tick_s), ideal.span_ticks));
    }
  }

  std::vector<std::int64_t> merged;
  merged.reserve(thinned.size() + dark.size());
  std::merge(thinned.begin(), thinned.end(), dark.begin(), dark.end(), std::back_inserter(merged));

  const std::int64_t out_ps = det.tick_ps();
  TagStream out{ideal.channel, out_ps, rescale_ticks(ideal.span_ticks, ideal.tick_ps, out_ps), {}};
  out.tags.reserve(merged.size());

  // Quantize first, then filter, so the dead-time gap holds on the final ticks.
  const double dead_ps = det.dead_time * 1e12;
  bool have_last = false;
  std::int64_t last = 0;
  for (std::int64_t tag : merged) {
    const std::int64_t q = rescale_ticks(tag, ideal.tick_ps, out_ps);
    if (have_last && dead_ps > 0.0 && !(static_cast<double>(q - last) * static_cast<double>(out_ps) > dead_ps)) {
      continue;
    }
    out.tags.push_back(q);
    last = q;
    have_last = true;
  }
  return out;
}

}  // namespace spdc::sim
