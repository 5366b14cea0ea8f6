#include <benchmark/benchmark.h>

#include <algorithm>
#include <vector>

#include "spdc/correlator.hpp"
#include "spdc/inference.hpp"
#include "spdc/random.hpp"
#include "spdc/source.hpp"

using namespace spdc;

namespace {

sim::SimConfig config(double rate, double duration) {
  sim::SimConfig cfg;
  cfg.duration = duration;
  cfg.seed = 1;
  cfg.source.pair_rate = rate;
  cfg.source.gamma = sim::SourceParams::gamma_from_bandwidth(13e6);
  cfg.idler_detector = cfg.signal1_detector = cfg.signal2_detector = sim::DetectorParams::ideal();
  return cfg;
}

sim::PairStreams detected_pairs(double rate, double duration) {
  const auto cfg = config(rate, duration);
  sim::PairStreams ideal = sim::simulate_pairs(cfg);
  return {sim::apply_detector(ideal.signal, cfg.signal1_detector, 2),
          sim::apply_detector(ideal.idler, cfg.idler_detector, 3)};
}

void BM_SimulatePairs(benchmark::State& state) {
  const auto cfg = config(static_cast<double>(state.range(0)), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(sim::simulate_pairs(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulatePairs)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_SimulateClustered(benchmark::State& state) {
  auto cfg = config(1e6, 1.0);
  cfg.source.model = sim::SourceModel::ClusteredMultimode;
  cfg.source.n_modes = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sim::simulate_clustered(cfg));
  state.SetItemsProcessed(state.iterations() * 1000000);
}
BENCHMARK(BM_SimulateClustered)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_ApplyDetector(benchmark::State& state) {
  const auto cfg = config(1e6, 1.0);
  const auto ideal = sim::simulate_pairs(cfg);
  const sim::DetectorParams det{0.075, 10e-6, 100, 162e-12};
  for (auto _ : state) benchmark::DoNotOptimize(sim::apply_detector(ideal.signal, det, 4));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ideal.signal.size()));
}
BENCHMARK(BM_ApplyDetector)->Unit(benchmark::kMillisecond);

void BM_CrossCorrelogram(benchmark::State& state) {
  const auto p = detected_pairs(static_cast<double>(state.range(0)), 1.0);
  corr::CorrelogramConfig c;
  c.max_lag = 300e-9;
  c.mode = state.range(1) ? corr::CorrelogramMode::WindowedPairwise : corr::CorrelogramMode::StartStop;
  for (auto _ : state) benchmark::DoNotOptimize(corr::cross_correlogram(p.idler, p.signal, c));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.idler.size()));
}
BENCHMARK(BM_CrossCorrelogram)
    ->Args({100000, 0})
    ->Args({100000, 1})
    ->Args({1000000, 0})
    ->Args({1000000, 1})
    ->Unit(benchmark::kMillisecond);

void BM_Coincidences(benchmark::State& state) {
  const auto p = detected_pairs(1e6, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(corr::coincidences(p.idler, p.signal, 30e-9));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.idler.size()));
}
BENCHMARK(BM_Coincidences)->Unit(benchmark::kMillisecond);

void BM_MergeStreams(benchmark::State& state) {
  Rng rng(5);
  std::vector<TagStream> streams;
  for (std::uint8_t ch = 0; ch < static_cast<std::uint8_t>(state.range(0)); ++ch) {
    TagStream s{ch, 162, 1'000'000'000, {}};
    for (int i = 0; i < 200000; ++i) s.tags.push_back(static_cast<std::int64_t>(rng.uniform() * 1e9));
    std::sort(s.tags.begin(), s.tags.end());
    streams.push_back(std::move(s));
  }
  for (auto _ : state) benchmark::DoNotOptimize(corr::merge_streams(streams));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 200000);
}
BENCHMARK(BM_MergeStreams)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_ConditionedG2(benchmark::State& state) {
  auto cfg = config(2e6, 1.0);
  const auto det = sim::simulate_experiment(cfg);
  corr::CorrelogramConfig c;
  c.max_lag = 20e-9;
  c.mode = corr::CorrelogramMode::WindowedPairwise;
  for (auto _ : state) benchmark::DoNotOptimize(corr::conditioned_g2(det.signal1, det.signal2, det.idler, 10e-9, c));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(det.idler.size()));
}
BENCHMARK(BM_ConditionedG2)->Unit(benchmark::kMillisecond);

void BM_FitExponential(benchmark::State& state) {
  const auto p = detected_pairs(1e5, 20.0);
  corr::CorrelogramConfig c;
  c.max_lag = 300e-9;
  c.mode = corr::CorrelogramMode::WindowedPairwise;
  const auto g = corr::normalize_g2(corr::cross_correlogram(p.idler, p.signal, c));
  for (auto _ : state) benchmark::DoNotOptimize(fit::fit_exponential(g));
}
BENCHMARK(BM_FitExponential)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
