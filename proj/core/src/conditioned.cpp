#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "spdc/correlator.hpp"
#include "spdc/error.hpp"

namespace spdc::corr {
namespace {

struct Occupied {
  std::int64_t offset;
  double count;
};

std::vector<Occupied> occupied(const std::vector<std::uint64_t>& hist, std::int64_t half) {
  std::vector<Occupied> out;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    if (hist[i] != 0) out.push_back({static_cast<std::int64_t>(i) - half, static_cast<double>(hist[i])});
  }
  return out;
}

}  // namespace

ConditionedG2 conditioned_g2(const TagStream& s1, const TagStream& s2, const TagStream& idler,
                             double herald_halfwidth, const CorrelogramConfig& cfg, bool with_surface) {
  cfg.validate();
  require_same_tick(s1, s2);
  require_same_tick(s1, idler);
  validate_stream(s1);
  validate_stream(s2);
  validate_stream(idler);
  if (!(herald_halfwidth > 0.0)) throw ConfigError("herald half-width must be > 0");
  if (herald_halfwidth > cfg.max_lag * (1.0 + 1e-12)) {
    throw ConfigError("herald interval exceeds the correlogram max_lag");
  }

  const std::int64_t tick = idler.tick_ps;
  const std::int64_t half = static_cast<std::int64_t>(std::floor(herald_halfwidth * 1e12 / static_cast<double>(tick) + 1e-9));
  const std::int64_t k_half = cfg.half_bins();
  const BinMapper bins(tick, cfg.bin_width_ps(), k_half);

  // Offsets of signal tags relative to their herald, summed over heralds.
  std::vector<std::uint64_t> offsets1(static_cast<std::size_t>(2 * half + 1), 0);
  std::vector<std::uint64_t> offsets2(offsets1.size(), 0);
  std::vector<std::uint64_t> numerator(cfg.bin_count(), 0);

  // Surface bins over the herald interval use the correlogram bin width.
  const std::int64_t k_surface = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::ceil(herald_halfwidth / cfg.bin_width * (1.0 - 1e-12))));
  const BinMapper surface_bins(tick, cfg.bin_width_ps(), k_surface);
  const std::size_t surface_n = static_cast<std::size_t>(2 * k_surface + 1);
  std::vector<std::uint64_t> surface_num;
  if (with_surface) surface_num.assign(surface_n * surface_n, 0);

  ConditionedG2 out;
  out.heralds = idler.size();
  const auto& a = s1.tags;
  const auto& b = s2.tags;
  std::size_t lo1 = 0;
  std::size_t lo2 = 0;
  for (std::int64_t t : idler.tags) {
    while (lo1 < a.size() && a[lo1] < t - half) ++lo1;
    while (lo2 < b.size() && b[lo2] < t - half) ++lo2;
    std::size_t hi1 = lo1;
    while (hi1 < a.size() && a[hi1] <= t + half) ++hi1;
    std::size_t hi2 = lo2;
    while (hi2 < b.size() && b[hi2] <= t + half) ++hi2;
    if (hi1 == lo1 && hi2 == lo2) continue;
    ++out.heralded_events;
    for (std::size_t i = lo1; i < hi1; ++i) ++offsets1[static_cast<std::size_t>(a[i] - t + half)];
    for (std::size_t j = lo2; j < hi2; ++j) ++offsets2[static_cast<std::size_t>(b[j] - t + half)];
    for (std::size_t i = lo1; i < hi1; ++i) {
      for (std::size_t j = lo2; j < hi2; ++j) {
        ++out.triples;
        if (auto k = bins.index(a[i] - b[j])) ++numerator[static_cast<std::size_t>(*k + k_half)];
        if (with_surface) {
          const auto u1 = *surface_bins.index(a[i] - t) + k_surface;
          const auto u2 = *surface_bins.index(b[j] - t) + k_surface;
          ++surface_num[static_cast<std::size_t>(u1) * surface_n + static_cast<std::size_t>(u2)];
        }
      }
    }
  }

  // Expected triples if s1 and s2 were independent given the herald:
  // N_i * p1(u1) * p2(u2) = H1(u1) H2(u2) / N_i, collected along u1 - u2.
  std::vector<double> denominator(cfg.bin_count(), 0.0);
  const auto occ1 = occupied(offsets1, half);
  const auto occ2 = occupied(offsets2, half);
  const double inv_heralds = out.heralds > 0 ? 1.0 / static_cast<double>(out.heralds) : 0.0;
  for (const Occupied& p : occ1) {
    for (const Occupied& q : occ2) {
      if (auto k = bins.index(p.offset - q.offset)) {
        denominator[static_cast<std::size_t>(*k + k_half)] += p.count * q.count * inv_heralds;
      }
    }
  }

  G2Curve& curve = out.curve;
  curve.bin_width = cfg.bin_width;
  curve.counts = numerator;
  const std::size_t n = numerator.size();
  curve.tau.resize(n);
  curve.g2.resize(n);
  curve.sigma.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    curve.tau[i] = static_cast<double>(static_cast<std::int64_t>(i) - k_half) * cfg.bin_width;
    const double num = static_cast<double>(numerator[i]);
    if (denominator[i] > 0.0) {
      curve.g2[i] = num / denominator[i];
      curve.sigma[i] = std::sqrt(std::max(num, 1.0)) / denominator[i];
    } else {
      curve.g2[i] = 0.0;
      curve.sigma[i] = std::numeric_limits<double>::infinity();
    }
  }
  out.denominator = std::move(denominator);

  if (with_surface) {
    ConditionedSurface surface;
    for (std::int64_t k = -k_surface; k <= k_surface; ++k) {
      surface.axis.push_back(static_cast<double>(k) * cfg.bin_width);
    }
    std::vector<double> marginal1(surface_n, 0.0);
    std::vector<double> marginal2(surface_n, 0.0);
    for (const Occupied& p : occ1) marginal1[static_cast<std::size_t>(*surface_bins.index(p.offset) + k_surface)] += p.count;
    for (const Occupied& q : occ2) marginal2[static_cast<std::size_t>(*surface_bins.index(q.offset) + k_surface)] += q.count;
    surface.denominator.resize(surface_n * surface_n);
    for (std::size_t i = 0; i < surface_n; ++i) {
      for (std::size_t j = 0; j < surface_n; ++j) {
        surface.denominator[i * surface_n + j] = marginal1[i] * marginal2[j] * inv_heralds;
      }
    }
    surface.numerator = std::move(surface_num);
    out.surface = std::move(surface);
  }
  return out;
}

}  // namespace spdc::corr
