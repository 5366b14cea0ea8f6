#include "spdc/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <tuple>

#include "spdc/error.hpp"

namespace spdc::corr {
namespace {

std::int64_t whole_ps(double seconds, const char* what) {
  const double ps = seconds * 1e12;
  const double whole = std::round(ps);
  if (!(whole >= 0.0) || std::abs(ps - whole) > 1e-6 * std::max(1.0, whole)) {
    throw ConfigError(std::string(what) + " must be a whole number of picoseconds");
  }
  return static_cast<std::int64_t>(whole);
}

Correlogram empty_correlogram(const CorrelogramConfig& cfg, const TagStream& a, const TagStream& b) {
  Correlogram h;
  h.config = cfg;
  const std::int64_t k = cfg.half_bins();
  h.bin_edges.reserve(cfg.bin_count() + 1);
  for (std::int64_t i = -k; i <= k + 1; ++i) {
    h.bin_edges.push_back((static_cast<double>(i) - 0.5) * cfg.bin_width);
  }
  h.counts.assign(cfg.bin_count(), 0);
  h.tick_ps = a.tick_ps;
  const BinMapper bins(a.tick_ps, cfg.bin_width_ps(), k);
  for (std::int64_t i = -k; i <= k; ++i) {
    const auto [first, last] = bins.delay_range(i);
    h.bin_ticks.push_back(std::max<std::int64_t>(0, last - first + 1));
  }
  h.n_a = a.size();
  h.n_b = b.size();
  h.span = a.span_seconds();
  return h;
}

void check_inputs(const TagStream& a, const TagStream& b, const CorrelogramConfig& cfg) {
  cfg.validate();
  require_same_tick(a, b);
  validate_stream(a);
  validate_stream(b);
}

// Histogram every (i, j) with |t_b[j] - t_a[i]| inside the bin range.
void windowed(std::span<const std::int64_t> a, std::span<const std::int64_t> b, const BinMapper& bins,
              std::int64_t offset, bool skip_self, std::vector<std::uint64_t>& counts) {
  const std::int64_t reach = bins.max_delay();
  std::size_t start = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::int64_t t = a[i];
    while (start < b.size() && b[start] < t - reach) ++start;
    for (std::size_t j = start; j < b.size() && b[j] <= t + reach; ++j) {
      if (skip_self && j == i) continue;
      if (auto k = bins.index(b[j] - t)) ++counts[static_cast<std::size_t>(*k + offset)];
    }
  }
}

void start_stop(std::span<const std::int64_t> a, std::span<const std::int64_t> b, const BinMapper& bins,
                std::int64_t offset, bool autocorrelation, std::vector<std::uint64_t>& counts) {
  auto record = [&](std::int64_t delay) {
    if (auto k = bins.index(delay)) ++counts[static_cast<std::size_t>(*k + offset)];
  };
  if (autocorrelation) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i + 1 < a.size()) record(a[i + 1] - a[i]);
      if (i > 0) record(a[i - 1] - a[i]);
    }
    return;
  }
  std::size_t next = 0;  // first b with b >= t
  for (std::int64_t t : a) {
    while (next < b.size() && b[next] < t) ++next;
    if (next < b.size()) record(b[next] - t);
    if (next > 0) record(b[next - 1] - t);
  }
}

}  // namespace

void CorrelogramConfig::validate() const {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw ConfigError("bin_width must be > 0");
  if (!(max_lag >= bin_width * (1.0 - 1e-9)) || !std::isfinite(max_lag)) {
    throw ConfigError("max_lag must be >= bin_width");
  }
  if (bin_width_ps() <= 0) throw ConfigError("bin_width must be at least 1 ps");
}

std::int64_t CorrelogramConfig::bin_width_ps() const { return whole_ps(bin_width, "bin_width"); }

std::int64_t CorrelogramConfig::half_bins() const {
  const double ratio = max_lag / bin_width;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(ratio * (1.0 - 1e-12))));
}

BinMapper::BinMapper(std::int64_t tick_ps, std::int64_t bin_width_ps, std::int64_t half_bins)
    : tick_ps_(tick_ps), width_ps_(bin_width_ps), half_bins_(half_bins) {
  max_delay_ = ((2 * half_bins_ + 1) * width_ps_) / (2 * tick_ps_);
}

std::optional<std::int64_t> BinMapper::index(std::int64_t delay_ticks) const noexcept {
  const std::int64_t s = delay_ticks < 0 ? -delay_ticks : delay_ticks;
  if (s > max_delay_) return std::nullopt;
  // Nearest bin of |delay| / width, exact halves toward zero.
  const std::int64_t num = 2 * s * tick_ps_ - width_ps_;
  const std::int64_t m = num > 0 ? (num + 2 * width_ps_ - 1) / (2 * width_ps_) : 0;
  return delay_ticks < 0 ? -m : m;
}

std::pair<std::int64_t, std::int64_t> BinMapper::delay_range(std::int64_t k) const noexcept {
  // Bin m > 0 holds |d| in ((2m - 1) w / 2t, (2m + 1) w / 2t]; bin 0 holds |d| <= w / 2t.
  const std::int64_t m = k < 0 ? -k : k;
  if (m > half_bins_) return {1, 0};
  const std::int64_t hi = ((2 * m + 1) * width_ps_) / (2 * tick_ps_);
  if (m == 0) return {-hi, hi};
  const std::int64_t lo = ((2 * m - 1) * width_ps_) / (2 * tick_ps_) + 1;
  return k > 0 ? std::pair{lo, hi} : std::pair{-hi, -lo};
}

Correlogram cross_correlogram(const TagStream& a, const TagStream& b, const CorrelogramConfig& cfg) {
  check_inputs(a, b, cfg);
  Correlogram h = empty_correlogram(cfg, a, b);
  const BinMapper bins(a.tick_ps, cfg.bin_width_ps(), cfg.half_bins());
  if (cfg.mode == CorrelogramMode::WindowedPairwise) {
    windowed(a.tags, b.tags, bins, cfg.half_bins(), false, h.counts);
  } else {
    start_stop(a.tags, b.tags, bins, cfg.half_bins(), false, h.counts);
  }
  return h;
}

Correlogram auto_correlogram(const TagStream& a, const CorrelogramConfig& cfg) {
  check_inputs(a, a, cfg);
  Correlogram h = empty_correlogram(cfg, a, a);
  h.autocorrelation = true;
  const BinMapper bins(a.tick_ps, cfg.bin_width_ps(), cfg.half_bins());
  if (cfg.mode == CorrelogramMode::WindowedPairwise) {
    windowed(a.tags, a.tags, bins, cfg.half_bins(), true, h.counts);
  } else {
    start_stop(a.tags, a.tags, bins, cfg.half_bins(), true, h.counts);
  }
  return h;
}

G2Curve normalize_g2(const Correlogram& h) {
  if (!(h.span > 0.0)) throw NumericalError("cannot normalize a correlogram with zero span");
  if (h.n_a == 0 || h.n_b == 0) {
    throw NumericalError("cannot normalize a correlogram: an input stream has no counts");
  }
  const double pairs_per_second = static_cast<double>(h.n_a) * static_cast<double>(h.n_b) / h.span;
  const double tick = static_cast<double>(h.tick_ps) * 1e-12;
  const BinMapper bins(h.tick_ps, h.config.bin_width_ps(), h.config.half_bins());
  const std::int64_t k0 = h.config.half_bins();
  G2Curve curve;
  curve.bin_width = h.config.bin_width;
  curve.counts = h.counts;
  const std::size_t n = h.counts.size();
  curve.tau.resize(n);
  curve.g2.resize(n);
  curve.sigma.resize(n);
  curve.bin_lo.resize(n);
  curve.bin_hi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = static_cast<double>(h.counts[i]);
    const auto [first, last] = bins.delay_range(static_cast<std::int64_t>(i) - k0);
    curve.tau[i] = h.bin_center(i);
    // A tick delay d collects continuous delays around d * tick, +- half a tick.
    curve.bin_lo[i] = (static_cast<double>(first) - 0.5) * tick;
    curve.bin_hi[i] = (static_cast<double>(last) + 0.5) * tick;
    const double norm = pairs_per_second * static_cast<double>(h.bin_ticks[i]) * tick;
    if (norm > 0.0) {
      curve.g2[i] = c / norm;
      curve.sigma[i] = std::sqrt(std::max(c, 1.0)) / norm;
    } else {
      curve.g2[i] = 0.0;
      curve.sigma[i] = HUGE_VAL;
    }
  }
  return curve;
}

std::uint64_t coincidences(const TagStream& a, const TagStream& b, double window) {
  require_same_tick(a, b);
  validate_stream(a);
  validate_stream(b);
  if (!(window >= 0.0)) throw ConfigError("coincidence window must be >= 0");
  // |d| * tick <= window / 2  <=>  |d| <= floor(window / (2 tick)).
  const std::int64_t half = whole_ps(window, "coincidence window") / (2 * a.tick_ps);
  std::uint64_t count = 0;
  std::size_t start = 0;
  for (std::int64_t t : a.tags) {
    while (start < b.tags.size() && b.tags[start] < t - half) ++start;
    if (start < b.tags.size() && b.tags[start] <= t + half) ++count;
  }
  return count;
}

std::vector<TagEvent> merge_streams(std::span<const TagStream> streams) {
  std::size_t total = 0;
  for (const TagStream& s : streams) {
    if (!streams.empty()) require_same_tick(streams.front(), s);
    validate_stream(s);
    total += s.size();
  }
  // (tick, channel, stream index) min-heap; O(N log k).
  using Head = std::tuple<std::int64_t, std::uint8_t, std::size_t>;
  std::priority_queue<Head, std::vector<Head>, std::greater<>> heap;
  std::vector<std::size_t> cursor(streams.size(), 0);
  for (std::size_t k = 0; k < streams.size(); ++k) {
    if (!streams[k].empty()) heap.emplace(streams[k].tags[0], streams[k].channel, k);
  }
  std::vector<TagEvent> out;
  out.reserve(total);
  while (!heap.empty()) {
    auto [tick, channel, k] = heap.top();
    heap.pop();
    out.push_back({channel, tick});
    if (++cursor[k] < streams[k].size()) heap.emplace(streams[k].tags[cursor[k]], channel, k);
  }
  return out;
}

}  // namespace spdc::corr
