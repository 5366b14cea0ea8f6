#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "spdc/correlator.hpp"
#include "spdc/error.hpp"
#include "support.hpp"

using namespace spdc;
using namespace spdc::corr;
using spdc::test::make_stream;

namespace {

CorrelogramConfig windowed(double bin, double lag) {
  CorrelogramConfig c;
  c.bin_width = bin;
  c.max_lag = lag;
  c.mode = CorrelogramMode::WindowedPairwise;
  return c;
}

}  // namespace

TEST(CorrelogramConfig, HalfBinsAndValidation) {
  CorrelogramConfig c;
  EXPECT_EQ(c.half_bins(), 34);  // ceil(100 / 3)
  EXPECT_EQ(c.bin_count(), 69u);
  c.max_lag = 99e-9;
  EXPECT_EQ(c.half_bins(), 33);
  c.bin_width = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.bin_width = 3.0005e-9;
  EXPECT_THROW(c.validate(), ConfigError);
  c.bin_width = 3e-9;
  c.max_lag = 1e-9;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(BinMapper, EdgesGoTowardZero) {
  // 162 ps ticks, 3 ns bins: 250 ticks = 40.5 ns is exactly on the 13/14 edge.
  const BinMapper m(162, 3000, 20);
  EXPECT_EQ(*m.index(250), 13);
  EXPECT_EQ(*m.index(-250), -13);
  EXPECT_EQ(*m.index(251), 14);
  EXPECT_EQ(*m.index(0), 0);
  EXPECT_EQ(*m.index(9), 0);    // 1458 ps
  EXPECT_EQ(*m.index(10), 1);   // 1620 ps
  EXPECT_EQ(*m.index(-10), -1);
  // Largest reachable delay: 41 * 3000 / 2 / 162 = 379.6 ticks.
  EXPECT_EQ(m.max_delay(), 379);
  EXPECT_TRUE(m.index(379).has_value());
  EXPECT_FALSE(m.index(380).has_value());
}

TEST(BinMapper, DelayRangesTileTheLine) {
  for (std::int64_t tick : {1, 7, 162, 1000, 4000}) {
    const std::int64_t w = 3000, k = 5;
    const BinMapper m(tick, w, k);
    std::int64_t expected_first = -m.max_delay();
    for (std::int64_t b = -k; b <= k; ++b) {
      const auto [first, last] = m.delay_range(b);
      if (first > last) continue;  // coarse tick: bin covers no delay
      EXPECT_EQ(first, expected_first) << "tick " << tick << " bin " << b;
      for (std::int64_t d = first; d <= last; ++d) ASSERT_EQ(*m.index(d), b);
      expected_first = last + 1;
    }
    EXPECT_EQ(expected_first, m.max_delay() + 1);
  }
}

TEST(CrossCorrelogram, TwoEventToy) {
  // a at 0, b at 10 ticks of 162 ps = 1.62 ns -> bin +1 with 3 ns bins.
  const TagStream a = make_stream({0}, 162, 100);
  const TagStream b = make_stream({10}, 162, 100);
  const Correlogram h = cross_correlogram(a, b, windowed(3e-9, 9e-9));
  ASSERT_EQ(h.counts.size(), 7u);
  std::vector<std::uint64_t> expected{0, 0, 0, 0, 1, 0, 0};
  EXPECT_EQ(h.counts, expected);
  EXPECT_DOUBLE_EQ(h.bin_edges.front(), -10.5e-9);
  EXPECT_DOUBLE_EQ(h.bin_center(3), 0.0);
  const Correlogram r = cross_correlogram(b, a, windowed(3e-9, 9e-9));
  std::vector<std::uint64_t> mirrored{0, 0, 1, 0, 0, 0, 0};
  EXPECT_EQ(r.counts, mirrored);
}

TEST(CrossCorrelogram, StartStopTakesNearestNeighbours) {
  // Start at 100; stops at 90, 95, 105, 110. Start-stop uses 95 (preceding)
  // and 105 (following) only; windowed sees all four.
  const TagStream a = make_stream({100}, 1000, 200);
  const TagStream b = make_stream({90, 95, 105, 110}, 1000, 200);
  CorrelogramConfig ss;
  ss.bin_width = 1e-9;
  ss.max_lag = 20e-9;
  const Correlogram h = cross_correlogram(a, b, ss);
  const std::int64_t k = ss.half_bins();
  EXPECT_EQ(h.counts[static_cast<std::size_t>(k + 5)], 1u);
  EXPECT_EQ(h.counts[static_cast<std::size_t>(k - 5)], 1u);
  EXPECT_EQ(h.counts[static_cast<std::size_t>(k + 10)], 0u);
  std::uint64_t total = 0;
  for (auto c : h.counts) total += c;
  EXPECT_EQ(total, 2u);
  ss.mode = CorrelogramMode::WindowedPairwise;
  const Correlogram w = cross_correlogram(a, b, ss);
  total = 0;
  for (auto c : w.counts) total += c;
  EXPECT_EQ(total, 4u);
}

TEST(CrossCorrelogram, StartStopCoincidentStopCountsOnce) {
  const TagStream a = make_stream({100}, 1000, 200);
  const TagStream b = make_stream({100}, 1000, 200);
  CorrelogramConfig ss;
  ss.bin_width = 1e-9;
  ss.max_lag = 5e-9;
  const Correlogram h = cross_correlogram(a, b, ss);
  EXPECT_EQ(h.counts[5], 1u);
}

TEST(CrossCorrelogram, RejectsBadInput) {
  const TagStream a = make_stream({1, 2}, 162, 10);
  const TagStream b = make_stream({1, 2}, 81, 10);
  EXPECT_THROW(cross_correlogram(a, b, windowed(3e-9, 9e-9)), FormatError);
  TagStream unsorted{0, 162, 10, {5, 1}};
  EXPECT_THROW(cross_correlogram(unsorted, a, windowed(3e-9, 9e-9)), ContractError);
}

TEST(CrossCorrelogram, MirrorSymmetryExact) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const TagStream a = test::random_stream(rng, 400, 20000);
    const TagStream b = test::random_stream(rng, 300, 20000);
    for (auto mode : {CorrelogramMode::WindowedPairwise, CorrelogramMode::StartStop}) {
      CorrelogramConfig c = windowed(3e-9, 100e-9);
      c.mode = mode;
      const Correlogram ab = cross_correlogram(a, b, c);
      const Correlogram ba = cross_correlogram(b, a, c);
      std::vector<std::uint64_t> rev(ba.counts.rbegin(), ba.counts.rend());
      if (mode == CorrelogramMode::WindowedPairwise) {
        ASSERT_EQ(ab.counts, rev);
      } else {
        // Nearest-neighbour pairings differ by direction; totals stay bounded.
        std::uint64_t n = 0;
        for (auto v : ab.counts) n += v;
        EXPECT_LE(n, 2 * a.size());
      }
    }
  }
}

TEST(AutoCorrelogram, SymmetricAndNoSelfPairs) {
  Rng rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const TagStream a = test::random_stream(rng, 500, 30000);
    for (auto mode : {CorrelogramMode::WindowedPairwise, CorrelogramMode::StartStop}) {
      CorrelogramConfig c = windowed(3e-9, 60e-9);
      c.mode = mode;
      const Correlogram h = auto_correlogram(a, c);
      std::vector<std::uint64_t> rev(h.counts.rbegin(), h.counts.rend());
      ASSERT_EQ(h.counts, rev);
      EXPECT_TRUE(h.autocorrelation);
    }
    const Correlogram w = auto_correlogram(a, windowed(3e-9, 60e-9));
    ASSERT_EQ(w.counts, test::brute_windowed(a, a, windowed(3e-9, 60e-9), true));
  }
  const TagStream single = make_stream({5}, 162, 10);
  const Correlogram h = auto_correlogram(single, windowed(3e-9, 9e-9));
  for (auto c : h.counts) EXPECT_EQ(c, 0u);
}

TEST(CrossCorrelogram, WindowedMatchesBruteForceIncludingDuplicates) {
  Rng rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 800);
    const TagStream a = test::random_stream(rng, n, 5000);
    const TagStream b = test::random_stream(rng, n / 2 + 1, 5000);
    const CorrelogramConfig c = windowed(3e-9, 50e-9);
    ASSERT_EQ(cross_correlogram(a, b, c).counts, test::brute_windowed(a, b, c));
  }
}

TEST(NormalizeG2, FlatForUniformCoverage) {
  // 1 ps tick, 1000 ps bins: every bin covers exactly 1000 ticks except the centre (1001).
  Correlogram h;
  h.config = windowed(1e-9, 2e-9);
  h.tick_ps = 1;
  h.n_a = 100000;
  h.n_b = 10000;  // n_a n_b / span * 1 ns = 1
  h.span = 1.0;
  h.counts = {1, 1, 1, 1, 1};
  h.bin_ticks = {1000, 1000, 1001, 1000, 1000};
  h.bin_edges = {-2.5e-9, -1.5e-9, -0.5e-9, 0.5e-9, 1.5e-9, 2.5e-9};
  const G2Curve g = normalize_g2(h);
  EXPECT_DOUBLE_EQ(g.g2[0], 1.0);
  EXPECT_DOUBLE_EQ(g.g2[2], 1.0 / 1.001);
  EXPECT_DOUBLE_EQ(g.sigma[0], 1.0);
  EXPECT_DOUBLE_EQ(g.bin_lo[2], -500.5e-12);
  EXPECT_DOUBLE_EQ(g.bin_hi[2], 500.5e-12);
  EXPECT_DOUBLE_EQ(g.tau[4], 2e-9);
}

TEST(NormalizeG2, ErrorsOnEmptyInputs) {
  Correlogram h;
  h.config = windowed(1e-9, 2e-9);
  h.span = 0;
  EXPECT_THROW(normalize_g2(h), NumericalError);
  h.span = 1;
  h.n_a = 0;
  h.n_b = 3;
  EXPECT_THROW(normalize_g2(h), NumericalError);
}

TEST(NormalizeG2, IndependentPoissonIsFlat) {
  Rng rng(34);
  const std::int64_t span = 6'000'000'000;  // ~1 s at 162 ps
  const TagStream a = test::random_stream(rng, 200000, span);
  const TagStream b = test::random_stream(rng, 200000, span);
  const G2Curve g = normalize_g2(cross_correlogram(a, b, windowed(3e-9, 300e-9)));
  double chi2 = 0;
  for (std::size_t i = 0; i < g.size(); ++i) chi2 += std::pow((g.g2[i] - 1.0) / g.sigma[i], 2);
  // 201 bins; mean chi2 ~ 201, sd ~ 20.
  EXPECT_LT(chi2, 201 + 6 * 20);
}

TEST(Coincidences, MatchesBruteForce) {
  Rng rng(35);
  for (int trial = 0; trial < 30; ++trial) {
    const TagStream a = test::random_stream(rng, 600, 8000);
    const TagStream b = test::random_stream(rng, 400, 8000);
    for (std::int64_t w : {0, 162, 324, 3000, 30000}) {
      ASSERT_EQ(coincidences(a, b, static_cast<double>(w) * 1e-12), test::brute_coincidences(a, b, w));
    }
  }
  const TagStream a = make_stream({100}, 162, 200);
  const TagStream b = make_stream({100 + 92}, 162, 200);  // 92 ticks = 14.9 ns
  EXPECT_EQ(coincidences(a, b, 30e-9), 1u);
  const TagStream c = make_stream({100 + 93}, 162, 200);  // 15.07 ns
  EXPECT_EQ(coincidences(a, c, 30e-9), 0u);
}

TEST(MergeStreams, OrderAndTies) {
  const TagStream a = make_stream({1, 5, 9}, 162, 10, 2);
  const TagStream b = make_stream({1, 4, 9}, 162, 10, 0);
  const std::vector<TagStream> both{a, b};
  const auto merged = merge_streams(both);
  const std::vector<TagEvent> expected{{0, 1}, {2, 1}, {0, 4}, {2, 5}, {0, 9}, {2, 9}};
  EXPECT_EQ(merged, expected);
  const TagStream c = make_stream({1}, 81, 10, 1);
  const std::vector<TagStream> mixed{a, c};
  EXPECT_THROW(merge_streams(mixed), FormatError);
}
