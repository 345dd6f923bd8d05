#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crw/chain.hpp"
#include "crw/crw_sim.hpp"
#include "crw/error.hpp"
#include "crw/rings.hpp"
#include "crw/stats.hpp"
#include "crw/voter.hpp"

using namespace crw;

namespace {

MarkovChain chain(const Graph& g) { return build_generator(g); }

std::vector<double> gamma22_draws(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::gamma_distribution<double> g(2.0, 0.5);
  std::vector<double> out(n);
  for (auto& x : out) x = g(eng);
  return out;
}

}  // namespace

TEST(VoterState, CopiesOpinions) {
  VoterState s(4);
  EXPECT_EQ(s.distinct_opinions(), 4u);
  s.ring(0, 1);
  EXPECT_EQ(s.opinion(1), 0u);
  EXPECT_EQ(s.holders(0), 2u);
  EXPECT_EQ(s.holders(1), 0u);
  EXPECT_EQ(s.distinct_opinions(), 3u);
  s.ring(1, 0);  // same opinion: no change
  EXPECT_EQ(s.distinct_opinions(), 3u);
}

TEST(SimulateVoter, TimeZero) {
  const double grid[] = {0.0};
  Rng rng(1);
  const VoterTrajectory tr = simulate_voter(chain(make_cycle(5)), grid, rng);
  EXPECT_EQ(tr.nhat[0], 1u);
  EXPECT_EQ(tr.n_u[0], 1u);
  EXPECT_EQ(tr.distinct[0], 5u);
  EXPECT_TRUE(tr.survives[0]);
}

TEST(SimulateVoter, KTwoLaw) {
  const MarkovChain c = chain(make_path(2));
  const double t = 0.4;
  const auto nhat = sample_voter_nhat(c, t, {50000, 3, 1});
  double twos = 0;
  for (double v : nhat) twos += v == 2.0;
  const double p = 1 - std::exp(-2 * t);
  EXPECT_NEAR(twos / 50000, p, 4 * std::sqrt(p * (1 - p) / 50000));
}

TEST(SimulateVoter, DistinctOpinionsNonincreasing) {
  const MarkovChain c = chain(make_torus(2, 5));
  std::vector<double> grid;
  for (int i = 0; i <= 30; ++i) grid.push_back(0.3 * i);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const VoterTrajectory tr = simulate_voter(c, grid, rng);
    for (std::size_t j = 1; j < grid.size(); ++j) {
      EXPECT_LE(tr.distinct[j], tr.distinct[j - 1]);
      EXPECT_GE(tr.survives[j - 1], tr.survives[j]);
    }
  }
}

TEST(Duality, CycleFourGapsVanish) {
  const DualityReport r = duality_gap(chain(make_cycle(4)), 1.0, {20000, 5, 1});
  EXPECT_LE(r.ks_nhat_vs_Nt, r.ks_threshold);
  EXPECT_TRUE(r.survival_vs_density.within(4));
  EXPECT_TRUE(r.density_vs_inverse_N.within(4));
}

TEST(Duality, TwoPathInverseClusterSize) {
  // E(1/nhat_t) = e^{-2t} + (1 - e^{-2t}) / 2 = P_t.
  const double t = 0.7;
  const auto nhat = sample_voter_nhat(chain(make_path(2)), t, {60000, 8, 1});
  std::vector<double> inv(nhat.size());
  for (std::size_t i = 0; i < nhat.size(); ++i) inv[i] = 1.0 / nhat[i];
  const Summary s = summarize(inv);
  EXPECT_NEAR(s.mean, (1 + std::exp(-2 * t)) / 2, 4 * s.std_error);
}

TEST(Duality, TimeZeroKsIsZero) {
  const DualityReport r = duality_gap(chain(make_cycle(4)), 0.0, {500, 5, 1});
  EXPECT_EQ(r.ks_nhat_vs_Nt, 0.0);
}

TEST(Duality, SizeBiasAndTailIdentitiesOnCycleSix) {
  const DualityReport r = duality_gap(chain(make_cycle(6)), 1.0, {20000, 6, 1});
  ASSERT_EQ(r.size_bias.size(), 4u);
  for (const Gap& g : r.size_bias) EXPECT_TRUE(g.within(4)) << g.gap << " " << g.std_error;
  ASSERT_EQ(r.tail_identity.size(), 2u);
  for (const Gap& g : r.tail_identity) EXPECT_TRUE(g.within(4)) << g.gap << " " << g.std_error;
}

TEST(Duality, SeedSwapKeepsGapsWithinTolerance) {
  const MarkovChain c = chain(make_cycle(6));
  DualityOptions swapped;
  swapped.swap_streams = true;
  const DualityReport a = duality_gap(c, 1.0, {20000, 7, 1});
  const DualityReport b = duality_gap(c, 1.0, {20000, 7, 1}, swapped);
  EXPECT_NE(a.ks_nhat_vs_Nt, b.ks_nhat_vs_Nt);
  for (const DualityReport* r : {&a, &b}) {
    EXPECT_LE(r->ks_nhat_vs_Nt, r->ks_threshold);
    EXPECT_TRUE(r->survival_vs_density.within(4));
    EXPECT_TRUE(r->density_vs_inverse_N.within(4));
  }
}

TEST(Gap, ZeroErrorNeedsExactAgreement) {
  EXPECT_TRUE((Gap{0.0, 0.0}).within(4));
  EXPECT_FALSE((Gap{0.1, 0.0}).within(4));
  EXPECT_TRUE((Gap{0.3, 0.1}).within(4));
  EXPECT_FALSE((Gap{0.5, 0.1}).within(4));
}

TEST(NormalizedMoments, ConstantSamples) {
  const std::vector<double> xs(100, 3.5);
  for (const auto& m : normalized_moments(xs, 4)) EXPECT_NEAR(m.value, 1.0, 1e-12);
}

TEST(NormalizedMoments, GammaTwoTwo) {
  const auto xs = gamma22_draws(100000, 4);
  const auto m = normalized_moments(xs, 3);
  ASSERT_EQ(m.size(), 3u);
  EXPECT_NEAR(m[0].value, 1.0, 1e-12);
  EXPECT_LE(m[1].lower95, 1.5);
  EXPECT_GE(m[1].upper95, 1.5);
  EXPECT_LE(m[2].lower95, 3.0);
  EXPECT_GE(m[2].upper95, 3.0);
}

TEST(NormalizedMoments, EmptySamples) {
  try {
    normalized_moments(std::vector<double>{}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySamples);
  }
}

TEST(GammaKs, CalibratedOnTargetLaw) {
  const std::size_t n = 10000;
  EXPECT_LE(gamma_ks(gamma22_draws(n, 9)), 1.63 / std::sqrt(static_cast<double>(n)));
  // Mean normalization makes the statistic scale-free.
  auto scaled = gamma22_draws(n, 9);
  for (auto& x : scaled) x *= 7.0;
  EXPECT_NEAR(gamma_ks(scaled), gamma_ks(gamma22_draws(n, 9)), 1e-12);
}

TEST(GammaKs, EmptySamples) {
  try {
    gamma_ks(std::vector<double>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySamples);
  }
}

TEST(GammaKs, Cdf) {
  EXPECT_EQ(gamma22_cdf(0.0), 0.0);
  EXPECT_NEAR(gamma22_cdf(1.0), 1 - 3 * std::exp(-2.0), 1e-15);
}
