#include "spdc/source.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/random.hpp"

namespace spdc::sim {
namespace {

// Seed labels for the independent random sequences of one simulation.
constexpr std::uint64_t kOriginLabel = 1;
constexpr std::uint64_t kDelayLabel = 2;
constexpr std::uint64_t kSplitLabel = 3;
constexpr std::uint64_t kDetectorLabelBase = 16;
constexpr std::uint64_t kModeLabelBase = 1024;

// Thinning envelope for the thermal intensity |a|^2 ~ Exp(1). Truncation above
// the cap changes E[I^2] by about cap^2 exp(-cap) ~ 3e-5.
constexpr double kIntensityCap = 16.0;

std::int64_t wrap(std::int64_t tick, std::int64_t period) noexcept {
  std::int64_t r = tick % period;
  return r < 0 ? r + period : r;
}

std::int64_t span_ticks_of(const SimConfig& cfg) {
  const double ticks = cfg.duration / (static_cast<double>(cfg.ideal_tick_ps) * 1e-12);
  if (ticks >= 9.0e18) throw ConfigError("duration too long for the ideal tick resolution");
  return std::max<std::int64_t>(1, round_half_down(ticks));
}

// Turns sorted origination times (seconds) into signal/idler streams.
PairStreams attach_pairs(const SimConfig& cfg, const std::vector<double>& origins) {
  const double tick_s = static_cast<double>(cfg.ideal_tick_ps) * 1e-12;
  const std::int64_t period = span_ticks_of(cfg);
  Rng delays(derive_seed(cfg.seed, kDelayLabel));

  PairStreams out;
  out.signal.channel = kSignal1Channel;
  out.idler.channel = kIdlerChannel;
  for (TagStream* s : {&out.signal, &out.idler}) {
    s->tick_ps = cfg.ideal_tick_ps;
    s->span_ticks = period;
    s->tags.reserve(origins.size());
  }
  for (double t : origins) {
    const double delay = delays.laplace(cfg.source.gamma);
    out.signal.tags.push_back(wrap(round_half_down(t / tick_s), period));
    out.idler.tags.push_back(wrap(round_half_down((t - delay) / tick_s), period));
  }
  std::sort(out.signal.tags.begin(), out.signal.tags.end());
  std::sort(out.idler.tags.begin(), out.idler.tags.end());
  return out;
}

}  // namespace

double SourceParams::bandwidth_hz() const noexcept { return gamma / (2.0 * std::numbers::pi); }

double SourceParams::gamma_from_bandwidth(double bandwidth_hz) noexcept {
  return 2.0 * std::numbers::pi * bandwidth_hz;
}

void SourceParams::validate() const {
  if (!(pair_rate >= 0.0) || !std::isfinite(pair_rate)) throw ConfigError("pair_rate must be >= 0");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be > 0");
  if (n_modes < 1) throw ConfigError("n_modes must be >= 1");
  if (gamma_auto && (!(*gamma_auto > 0.0) || !std::isfinite(*gamma_auto))) {
    throw ConfigError("gamma_auto must be > 0");
  }
}

void SimConfig::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ConfigError("duration must be > 0");
  if (!(splitter_ratio >= 0.0 && splitter_ratio <= 1.0)) {
    throw ConfigError("splitter_ratio must lie in [0, 1]");
  }
  if (ideal_tick_ps <= 0) throw ConfigError("ideal_tick_ps must be > 0");
  source.validate();
  idler_detector.validate();
  signal1_detector.validate();
  signal2_detector.validate();
  (void)span_ticks_of(*this);
}

PairStreams simulate_pairs(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.source.model != SourceModel::PairPoisson) {
    throw ConfigError("simulate_pairs requires the pair_poisson model");
  }
  std::vector<double> origins;
  const double rate = cfg.source.pair_rate;
  if (rate > 0.0) {
    origins.reserve(static_cast<std::size_t>(rate * cfg.duration * 1.01 + 16));
    Rng rng(derive_seed(cfg.seed, kOriginLabel));
    for (double t = rng.exponential(rate); t < cfg.duration; t += rng.exponential(rate)) {
      origins.push_back(t);
    }
  }
  return attach_pairs(cfg, origins);
}

PairStreams simulate_clustered(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.source.model != SourceModel::ClusteredMultimode) {
    throw ConfigError("simulate_clustered requires the clustered_multimode model");
  }
  const int modes = cfg.source.n_modes;
  const double mode_rate = cfg.source.pair_rate / modes;
  // Amplitude correlation decays at half the intensity decay rate.
  const double kappa = cfg.source.auto_decay_rate() / 2.0;

  std::vector<double> origins;
  if (mode_rate > 0.0) {
    const double candidate_rate = kIntensityCap * mode_rate;
    origins.reserve(static_cast<std::size_t>(cfg.source.pair_rate * cfg.duration * 1.05 + 16));
    for (int mode = 0; mode < modes; ++mode) {
      Rng rng(derive_seed(cfg.seed, kModeLabelBase + static_cast<std::uint64_t>(mode)));
      auto [x0, y0] = rng.normal_pair();
      std::complex<double> amplitude(x0 * (std::numbers::sqrt2 / 2.0), y0 * (std::numbers::sqrt2 / 2.0));
      for (double t = 0.0;;) {
        const double step = rng.exponential(candidate_rate);
        t += step;
        if (t >= cfg.duration) break;
        // Exact Ornstein-Uhlenbeck transition over `step`, stationary E|a|^2 = 1.
        const double decay = std::exp(-kappa * step);
        const double spread = std::sqrt(0.5 * (1.0 - decay * decay));
        auto [x, y] = rng.normal_pair();
        amplitude = amplitude * decay + std::complex<double>(spread * x, spread * y);
        if (rng.uniform() * kIntensityCap < std::norm(amplitude)) origins.push_back(t);
      }
    }
    std::sort(origins.begin(), origins.end());
  }
  return attach_pairs(cfg, origins);
}

PairStreams simulate_source(const SimConfig& cfg) {
  switch (cfg.source.model) {
    case SourceModel::PairPoisson: return simulate_pairs(cfg);
    case SourceModel::ClusteredMultimode: return simulate_clustered(cfg);
  }
  throw ConfigError("unknown source model");
}

std::pair<TagStream, TagStream> split_beam(const TagStream& signal, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ConfigError("split ratio must lie in [0, 1]");
  TagStream s1{kSignal1Channel, signal.tick_ps, signal.span_ticks, {}};
  TagStream s2{kSignal2Channel, signal.tick_ps, signal.span_ticks, {}};
  s1.tags.reserve(static_cast<std::size_t>(static_cast<double>(signal.size()) * ratio * 1.01 + 16));
  s2.tags.reserve(static_cast<std::size_t>(static_cast<double>(signal.size()) * (1.0 - ratio) * 1.01 + 16));
  Rng rng(seed);
  for (std::int64_t tag : signal.tags) {
    (rng.uniform() < ratio ? s1 : s2).tags.push_back(tag);
  }
  return {std::move(s1), std::move(s2)};
}

DetectedStreams simulate_experiment(const SimConfig& cfg) {
  PairStreams ideal = simulate_source(cfg);
  auto [s1, s2] = split_beam(ideal.signal, cfg.splitter_ratio, derive_seed(cfg.seed, kSplitLabel));
  ideal.signal = TagStream{};

  DetectedStreams out;
  out.idler = apply_detector(ideal.idler, cfg.idler_detector, derive_seed(cfg.seed, kDetectorLabelBase + kIdlerChannel));
  ideal.idler = TagStream{};
  out.signal1 = apply_detector(s1, cfg.signal1_detector, derive_seed(cfg.seed, kDetectorLabelBase + kSignal1Channel));
  out.signal2 = apply_detector(s2, cfg.signal2_detector, derive_seed(cfg.seed, kDetectorLabelBase + kSignal2Channel));
  return out;
}

}  // namespace spdc::sim
