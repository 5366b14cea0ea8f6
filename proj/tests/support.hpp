#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "spdc/correlator.hpp"
#include "spdc/random.hpp"
#include "spdc/tag_stream.hpp"

namespace spdc::test {

inline TagStream make_stream(std::vector<std::int64_t> tags, std::int64_t tick_ps = 162, std::int64_t span = -1,
                             std::uint8_t channel = 0) {
  std::sort(tags.begin(), tags.end());
  if (span < 0) span = tags.empty() ? 0 : tags.back();
  return TagStream{channel, tick_ps, span, std::move(tags)};
}

/// Uniform random sorted tags, possibly with duplicates.
inline TagStream random_stream(Rng& rng, std::size_t n, std::int64_t span, std::int64_t tick_ps = 162,
                               std::uint8_t channel = 0) {
  std::vector<std::int64_t> tags(n);
  for (auto& t : tags) t = static_cast<std::int64_t>(rng.uniform() * static_cast<double>(span + 1));
  return make_stream(std::move(tags), tick_ps, span, channel);
}

/// Bin of a delay, computed independently of BinMapper: the nearest multiple
/// of the bin width, exact halves toward zero, in rational arithmetic.
inline bool brute_bin(std::int64_t delay_ticks, std::int64_t tick_ps, std::int64_t width_ps, std::int64_t half_bins,
                      std::int64_t& bin) {
  const std::int64_t ps = delay_ticks * tick_ps;
  const std::int64_t mag = ps < 0 ? -ps : ps;
  std::int64_t k = mag / width_ps;
  const std::int64_t rem = mag - k * width_ps;
  if (2 * rem > width_ps) ++k;  // strictly past the midpoint goes up
  if (k > half_bins) return false;
  bin = ps < 0 ? -k : k;
  return true;
}

/// O(N^2) windowed pairwise histogram.
inline std::vector<std::uint64_t> brute_windowed(const TagStream& a, const TagStream& b,
                                                 const corr::CorrelogramConfig& cfg, bool self = false) {
  const std::int64_t k = cfg.half_bins();
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(2 * k + 1), 0);
  for (std::size_t i = 0; i < a.tags.size(); ++i) {
    for (std::size_t j = 0; j < b.tags.size(); ++j) {
      if (self && i == j) continue;
      std::int64_t bin = 0;
      if (brute_bin(b.tags[j] - a.tags[i], a.tick_ps, cfg.bin_width_ps(), k, bin)) {
        ++counts[static_cast<std::size_t>(bin + k)];
      }
    }
  }
  return counts;
}

/// O(N^2) coincidence count: a-tags with any b-tag at |d| * tick <= W / 2.
inline std::uint64_t brute_coincidences(const TagStream& a, const TagStream& b, std::int64_t window_ps) {
  std::uint64_t n = 0;
  for (std::int64_t ta : a.tags) {
    for (std::int64_t tb : b.tags) {
      const std::int64_t d = std::abs(tb - ta) * a.tick_ps;
      if (2 * d <= window_ps) {
        ++n;
        break;
      }
    }
  }
  return n;
}

}  // namespace spdc::test
