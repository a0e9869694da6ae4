#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "slicefed/channel.hpp"

using namespace slicefed;
using namespace slicefed::channel;

namespace {

FadingParams no_shadowing() {
  FadingParams p;
  p.shadowing_sigma_db = 0.0;
  return p;
}

GainMatrix uniform_gains(std::size_t gnbs, std::size_t upc, double combined) {
  GainMatrix g(gnbs, upc);
  for (std::size_t n = 0; n < gnbs; ++n)
    for (std::size_t u = 0; u < g.num_ues(); ++u) g.set(n, u, LinkGain::make(combined, 1.0));
  return g;
}

}  // namespace

TEST(LargeScale, UnitDistanceNoShadowingIsOne) {
  Rng rng(1);
  EXPECT_DOUBLE_EQ(sample_large_scale(1.0, no_shadowing(), rng), 1.0);
}

TEST(LargeScale, PurePowerLaw) {
  Rng rng(1);
  EXPECT_NEAR(sample_large_scale(10.0, no_shadowing(), rng), std::pow(10.0, -3.7), 1e-18);
  EXPECT_NEAR(std::pow(10.0, -3.7), 1.995e-4, 1e-7);
}

TEST(LargeScale, LognormalMomentOracle) {
  Rng rng(7);
  FadingParams p;
  double sum = 0.0;
  constexpr int n = 1000000;
  for (int i = 0; i < n; ++i) sum += sample_large_scale(1.0, p, rng);
  const double s = p.shadowing_sigma_db * std::log(10.0) / 10.0;
  const double oracle = std::exp(s * s / 2.0);
  EXPECT_NEAR(sum / n, oracle, 0.02 * oracle);
}

TEST(SmallScale, ExponentialMomentsAndTail) {
  Rng rng(11);
  constexpr int n = 1000000;
  double sum = 0.0;
  int above = 0;
  bool nonneg = true;
  for (int i = 0; i < n; ++i) {
    const double g = sample_small_scale(rng);
    sum += g;
    above += g > 1.0;
    nonneg = nonneg && g >= 0.0;
  }
  EXPECT_TRUE(nonneg);
  EXPECT_NEAR(sum / n, 1.0, 0.01);
  EXPECT_NEAR(static_cast<double>(above) / n, std::exp(-1.0), 0.01 * std::exp(-1.0));
}

TEST(Sinr, SignalEqualsNoise) {
  FadingParams p;
  GainMatrix g(1, 1);
  g.set(0, 0, LinkGain::make(p.noise_power_w / p.tx_power_w, 1.0));
  EXPECT_NEAR(sinr(0, 0, g, p), 1.0, 1e-12);
}

TEST(Sinr, ZeroSignal) {
  FadingParams p;
  GainMatrix g(1, 1);
  g.set(0, 0, LinkGain::make(0.0, 1.0));
  EXPECT_EQ(sinr(0, 0, g, p), 0.0);
}

TEST(Sinr, TwoEqualCells) {
  FadingParams p;
  const double s = 3e-12;
  GainMatrix g = uniform_gains(2, 1, s / p.tx_power_w);
  EXPECT_NEAR(sinr(0, 0, g, p), s / (p.noise_power_w + s), 1e-12);
}

TEST(Sinr, NonincreasingInInterferer) {
  FadingParams p;
  Rng rng(3);
  std::uniform_real_distribution<double> u(1e-14, 1e-10);
  for (int trial = 0; trial < 200; ++trial) {
    GainMatrix g(3, 2);
    for (std::size_t n = 0; n < 3; ++n)
      for (std::size_t k = 0; k < g.num_ues(); ++k) g.set(n, k, LinkGain::make(u(rng), 1.0));
    const double before = sinr(0, 0, g, p);
    const auto old = g.at(2, 0);
    g.set(2, 0, LinkGain::make(old.large_scale * 1.5, 1.0));
    EXPECT_LE(sinr(0, 0, g, p), before);
  }
}

TEST(Rate, Examples) {
  EXPECT_DOUBLE_EQ(achievable_rate(1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(achievable_rate(20e6, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(achievable_rate(20e6, 3.0), 4.0e7);
}

TEST(Rate, MonotoneAndConcave) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const double m = 0.5 * (a + b);
    EXPECT_LE(achievable_rate(1e6, a), achievable_rate(1e6, b));
    EXPECT_GE(achievable_rate(1e6, m) + 1e-6, 0.5 * (achievable_rate(1e6, a) + achievable_rate(1e6, b)));
  }
}

TEST(Leakage, SingleCellHasNoNeighbors) {
  FadingParams p;
  GainMatrix g = uniform_gains(1, 3, 1e-9);
  const std::vector<Action> a{Action::equal_split()};
  EXPECT_EQ(interference_leakage(0, g, a, p), 0.0);
}

TEST(Leakage, LinearInTxPower) {
  FadingParams p;
  Rng rng(9);
  std::uniform_real_distribution<double> u(1e-12, 1e-9);
  GainMatrix g(3, 3);
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t k = 0; k < g.num_ues(); ++k) g.set(n, k, LinkGain::make(u(rng), 1.0));
  const std::vector<Action> a(3, Action::equal_split());
  const double base = interference_leakage(1, g, a, p);
  p.tx_power_w *= 2.0;
  EXPECT_EQ(interference_leakage(1, g, a, p), 2.0 * base);
}

TEST(Leakage, MatchesDoubleLoopWithFullOverlap) {
  FadingParams p;
  Rng rng(13);
  std::uniform_real_distribution<double> u(1e-12, 1e-9);
  GainMatrix g(3, 4);
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t k = 0; k < g.num_ues(); ++k) g.set(n, k, LinkGain::make(u(rng), u(rng) * 1e9));
  // Every gNB occupies the whole band, so each overlap factor is 1.
  const std::vector<Action> a(3, Action::equal_split());
  for (std::size_t n = 0; n < 3; ++n) {
    double oracle = 0.0;
    for (std::size_t m = 0; m < 3; ++m) {
      if (m == n) continue;
      for (std::size_t k = m * 4; k < (m + 1) * 4; ++k) oracle += p.tx_power_w * g.at(n, k).combined;
    }
    EXPECT_NEAR(interference_leakage(n, g, a, p), oracle, 1e-12 * oracle);
  }
}

TEST(Overlap, SubBandGeometry) {
  const Action aggressor{{0.5, 0.25, 0.0}};
  const Action victim{{0.5, 0.25, 0.25}};
  const PerSlice<double> full{1.0, 1.0, 1.0};
  EXPECT_NEAR(spectral_overlap(aggressor, full, victim, Slice::EMBB), 1.0, 1e-12);
  EXPECT_NEAR(spectral_overlap(aggressor, full, victim, Slice::URLLC), 1.0, 1e-12);
  EXPECT_NEAR(spectral_overlap(aggressor, full, victim, Slice::MMTC), 0.0, 1e-12);
  const PerSlice<double> half_embb{0.5, 1.0, 1.0};
  EXPECT_NEAR(spectral_overlap(aggressor, half_embb, victim, Slice::EMBB), 0.5, 1e-12);
  const Action empty_victim{{1.0, 0.0, 0.0}};
  EXPECT_EQ(spectral_overlap(aggressor, full, empty_victim, Slice::URLLC), 0.0);
}

TEST(Topology, HexagonalDropRespectsCells) {
  Rng rng(17);
  const auto t = Topology::hexagonal(7, 10, 500.0, 10.0, rng);
  ASSERT_EQ(t.sites.size(), 7u);
  ASSERT_EQ(t.ues.size(), 70u);
  EXPECT_NEAR(distance(t.sites[0], t.sites[1]), 500.0, 1e-9);
  for (std::size_t k = 0; k < t.ues.size(); ++k) {
    const std::size_t cell = k / 10;
    EXPECT_TRUE(t.inside_cell(cell, t.ues[k]));
    EXPECT_GE(distance(t.sites[cell], t.ues[k]), 10.0);
  }
}

TEST(ChannelState, DeterministicPerSeed) {
  auto run = [] {
    Rng topo(21);
    const auto t = Topology::hexagonal(7, 10, 500.0, 10.0, topo);
    FadingParams p;
    Rng ls(22);
    ChannelState c(t, p, ls);
    std::vector<Rng> streams;
    for (int n = 0; n < 7; ++n) streams.emplace_back(100 + n);
    std::vector<double> out;
    for (int slot = 0; slot < 5; ++slot) {
      c.draw_slot(slot, streams);
      for (std::size_t n = 0; n < 7; ++n)
        for (std::size_t u = 0; u < 70; ++u) out.push_back(c.gains().at(n, u).combined);
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(FadingParams, RejectsBadValues) {
  FadingParams p;
  p.noise_power_w = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = FadingParams{};
  p.shadowing_sigma_db = -1.0;
  EXPECT_THROW(p.validate(), DomainError);
}
