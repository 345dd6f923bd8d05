#include <gtest/gtest.h>

#include <cmath>

#include "crw/chain.hpp"
#include "crw/error.hpp"
#include "crw/meeting.hpp"

using namespace crw;

namespace {

MarkovChain chain(const Graph& g) { return build_generator(g); }

MarkovChain random_chain(Rng& rng, int n) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  for (int x = 1; x < n; ++x) {
    const auto y = static_cast<int>(rng.below(static_cast<std::uint64_t>(x)));
    r(x, y) = r(y, x) = rng.uniform(0.2, 2.0);
  }
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y)
      if (r(x, y) == 0 && rng.bernoulli(0.4)) r(x, y) = r(y, x) = rng.uniform(0.1, 2.0);
  return MarkovChain::from_dense(r);
}

std::vector<Vertex> random_subset(Rng& rng, std::size_t n) {
  std::vector<Vertex> s;
  while (s.empty() || s.size() == n) {
    s.clear();
    for (Vertex v = 0; v < n; ++v)
      if (rng.bernoulli(0.5)) s.push_back(v);
  }
  return s;
}

}  // namespace

TEST(PairwiseMeeting, KTwo) {
  const MeetingProfile p = pairwise_meeting_times(chain(make_path(2)));
  EXPECT_NEAR(p.pairwise(0, 1), 0.5, 1e-10);
  EXPECT_EQ(p.pairwise(0, 0), 0.0);
  EXPECT_NEAR(p.t_meet_pi, 0.25, 1e-10);
}

TEST(PairwiseMeeting, CycleFourHittingOracle) {
  // Difference walk of two rate-2 walkers on a cycle: E = k(n - k) / 4.
  const MeetingProfile p = pairwise_meeting_times(chain(make_cycle(4)));
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y) {
      const int k = std::abs(x - y);
      EXPECT_NEAR(p.pairwise(x, y), k * (4 - k) / 4.0, 1e-9);
    }
  EXPECT_LE(p.max_residual, 1e-9);
}

TEST(PairwiseMeeting, SymmetricZeroDiagonalAndModeRelation) {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const MarkovChain c = random_chain(rng, 6);
    const MeetingProfile p = pairwise_meeting_times(c);
    EXPECT_LE((p.pairwise - p.pairwise.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(p.pairwise.diagonal().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR(p.t_meet_pi, (1 - 1.0 / 6) * p.t_meet_distinct, 1e-12);
    EXPECT_LE(p.max_residual, 1e-9);
  }
}

TEST(PairwiseMeeting, TooLarge) {
  EXPECT_THROW(pairwise_meeting_times(chain(make_cycle(501))), Error);
}

TEST(MeanMeeting, Examples) {
  EXPECT_NEAR(mean_meeting_time(chain(make_cycle(4)), MeetingMode::PiPi), 5.0 / 8, 1e-10);
  EXPECT_NEAR(mean_meeting_time(chain(make_complete(4)), MeetingMode::PiPi), 3.0 / 8, 1e-10);
  EXPECT_NEAR(mean_meeting_time(chain(make_complete(4)), MeetingMode::Distinct), 0.5, 1e-10);
  EXPECT_NEAR(mean_meeting_time(chain(make_path(2)), MeetingMode::PiPi), 0.25, 1e-10);
}

TEST(MeanMeeting, MonteCarloAgrees) {
  const MarkovChain c = chain(make_cycle(6));
  const double exact = mean_meeting_time(c, MeetingMode::PiPi);
  const MeetingTimeEstimate est = estimate_meeting_time_mc(c, MeetingMode::PiPi, {40000, 9, 1});
  EXPECT_EQ(est.censored, 0u);
  EXPECT_NEAR(est.mean, exact, 4 * est.std_error);
  const MeetingTimeEstimate d = estimate_meeting_time_mc(c, MeetingMode::Distinct, {40000, 10, 1});
  EXPECT_NEAR(d.mean, mean_meeting_time(c, MeetingMode::Distinct), 4 * d.std_error);
}

TEST(MeanMeeting, RmaxDiagnosticOnCompleteGraph) {
  // Per-edge-unit rates give (1 - 1/n)^2 / 2; reported, not asserted against a bound.
  for (int n : {2, 4, 7}) {
    const double q = (1 - 1.0 / n) * (1 - 1.0 / n) / 2;
    EXPECT_NEAR(meeting_rmax_diagnostic(chain(make_complete(n))), q, 1e-10);
  }
}

TEST(AlphaSurvival, TimeZeroIsRate) {
  const MarkovChain c = chain(make_path(3));
  EXPECT_NEAR(alpha_survival_exact(c, 1, 0.0).value, 2.0, 1e-12);
  EXPECT_NEAR(alpha_survival_exact(c, 0, 0.0).value, 1.0, 1e-12);
}

TEST(AlphaSurvival, KTwoClosedForm) {
  EXPECT_NEAR(alpha_survival_exact(chain(make_path(2)), 0, 0.5).value, std::exp(-1.0), 1e-10);
}

TEST(AlphaSurvival, ExactAgreesWithMonteCarlo) {
  const MarkovChain c = chain(make_cycle(4));
  const double exact = alpha_survival_exact(c, 0, 0.25).value;
  const AlphaEstimate mc = alpha_survival_mc(c, 0, 0.25, {100000, 4, 1});
  EXPECT_NEAR(mc.value, exact, 3 * mc.std_error);
  EXPECT_LE(mc.lower95, mc.value);
  EXPECT_GE(mc.upper95, mc.value);
  const MarkovChain p = chain(make_path(5));
  const double e2 = alpha_survival_exact(p, 2, 1.0).value;
  const AlphaEstimate m2 = alpha_survival_mc(p, 2, 1.0, {50000, 5, 1});
  EXPECT_NEAR(m2.value, e2, 4 * m2.std_error);
}

TEST(AlphaSurvival, NonincreasingInTime) {
  const MarkovChain c = chain(make_torus(2, 4));
  double prev = INFINITY;
  for (double t = 0.0; t <= 5.0; t += 0.25) {
    const double a = alpha_survival_exact(c, 0, t).value;
    EXPECT_LE(a, prev + 1e-12);
    prev = a;
  }
}

TEST(ExitMeasure, SingletonIsJumpLaw) {
  const EdgeLine edges[] = {{0, 1, 2}, {0, 2, 1}, {1, 2, 1}};
  const MarkovChain c = chain(Graph(3, edges));
  const Vertex a[] = {0};
  const ExitMeasure m = exit_measure(c, a);
  EXPECT_NEAR(m.weights(1), 2.0 / 3, 1e-15);
  EXPECT_NEAR(m.weights(2), 1.0 / 3, 1e-15);
  EXPECT_EQ(m.weights(0), 0.0);
  EXPECT_NEAR(m.flow, 1.0, 1e-15);  // pi(0) r(0) = 3 / 3
}

TEST(ExitMeasure, KTwo) {
  const Vertex a[] = {0};
  const ExitMeasure m = exit_measure(chain(make_path(2)), a);
  EXPECT_EQ(m.weights(1), 1.0);
  EXPECT_NEAR(m.flow, 0.5, 1e-15);
}

TEST(ExitMeasure, NormalizedOnRandomSubsets) {
  const MarkovChain c = chain(make_cycle(8));
  Rng rng(12);
  for (int i = 0; i < 30; ++i) {
    const auto s = random_subset(rng, 8);
    EXPECT_NEAR(exit_measure(c, s).weights.sum(), 1.0, 1e-12);
  }
}

TEST(ExitMeasure, BadSubsets) {
  const MarkovChain c = chain(make_cycle(4));
  const Vertex all[] = {0, 1, 2, 3}, repeated[] = {1, 1}, out_of_range[] = {7};
  for (std::span<const Vertex> s : {std::span<const Vertex>(all), std::span<const Vertex>(repeated),
                                    std::span<const Vertex>(out_of_range), std::span<const Vertex>()}) {
    try {
      exit_measure(c, s);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadSubset);
    }
  }
  EXPECT_THROW(kac_residual(c, all), Error);
}

TEST(Kac, KTwoHandSolve) {
  const Vertex a[] = {0};
  EXPECT_LE(kac_residual(chain(make_path(2)), a), 1e-15);
}

TEST(Kac, RandomChainsAndSubsets) {
  Rng rng(21);
  for (int i = 0; i < 20; ++i) {
    const MarkovChain c = random_chain(rng, 3 + static_cast<int>(rng.below(6)));
    EXPECT_LE(kac_residual(c, random_subset(rng, c.n())), 1e-9);
  }
}

TEST(AldousBrown, CycleFourDiagonal) {
  const MarkovChain pc = product_chain(chain(make_cycle(4)));
  const auto diag = diagonal_states(4);
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(0.1 * i);
  const AldousBrownReport r = aldous_brown_check(pc, diag, grid);
  EXPECT_GE(r.worst_margin(), -1e-6);
  ASSERT_EQ(r.rows.size(), grid.size());
  for (const auto& row : r.rows) EXPECT_GT(row.density, 0.0);
}

TEST(AldousBrown, TimeZero) {
  const MarkovChain pc = product_chain(chain(make_cycle(4)));
  const auto diag = diagonal_states(4);
  const double t0[] = {0.0};
  const AldousBrownReport r = aldous_brown_check(pc, diag, t0);
  EXPECT_NEAR(r.rows[0].survival, 1.0 - 4.0 / 16, 1e-12);
  EXPECT_LE(4.0 / 16, r.t_rel / r.expected_hitting + 1e-12);
  EXPECT_TRUE(std::isnan(r.rows[0].density));
  EXPECT_GE(r.worst_margin(), -1e-6);
}

TEST(AldousBrown, RandomSixStateChains) {
  Rng rng(33);
  const std::vector<double> grid{0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0};
  for (int i = 0; i < 10; ++i) {
    const MarkovChain c = random_chain(rng, 6);
    EXPECT_GE(aldous_brown_check(c, random_subset(rng, 6), grid).worst_margin(), -1e-6);
  }
}

TEST(HittingSurvival, MatchesExpectation) {
  // integral of P_pi(T_A > t) dt = E_pi T_A.
  const MarkovChain c = chain(make_path(4));
  const Vertex a[] = {0};
  std::vector<double> times;
  const double h = 0.01;
  for (int i = 0; i <= 8000; ++i) times.push_back(i * h);
  const auto s = hitting_survival(c, a, times);
  double integral = 0;
  for (std::size_t i = 1; i < s.size(); ++i) integral += 0.5 * h * (s[i] + s[i - 1]);
  EXPECT_NEAR(integral, expected_hitting_time(c, a), 1e-3);
}

TEST(Eigentime, Examples) {
  EXPECT_LE(eigentime_residual(chain(make_cycle(4))), 1e-8);
  EXPECT_LE(eigentime_residual(chain(make_complete(4))), 1e-8);
  EXPECT_LE(eigentime_residual(chain(make_path(2))), 1e-8);
  EXPECT_LE(eigentime_residual(chain(make_torus(3, 3))), 1e-8);
}

TEST(Eigentime, NotTransitive) {
  try {
    eigentime_residual(chain(make_path(4)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotTransitive);
  }
}

TEST(Eigentime, CallerAssertedTransitivity) {
  // A relabelled cycle loses its family tag; the caller vouches for it.
  const EdgeLine edges[] = {{0, 2, 1}, {2, 1, 1}, {1, 3, 1}, {3, 0, 1}};
  MarkovChain c = chain(Graph(4, edges));
  c.assert_transitive();
  EXPECT_LE(eigentime_residual(c), 1e-8);
}

TEST(ReturnIntegralSandwich, TransitiveChains) {
  for (const Graph& g : {make_cycle(4), make_complete(4), make_torus(3, 3)}) {
    const MarkovChain c = chain(g);
    const double n = static_cast<double>(c.n());
    const double M = mean_meeting_time(c, MeetingMode::PiPi);
    const double t_rel = spectrum(c).t_rel;
    for (double t : {t_rel, 2 * t_rel, 5 * t_rel, 20 * t_rel}) {
      // int_0^t p_{2s}(x,x) ds = (1/2) int_0^{2t} p_u(x,x) du
      const double integral = 0.5 * return_integrals(c, 2 * t).M_t;
      EXPECT_GE(integral, M / (2 * n) - 1e-9);
      EXPECT_LE(integral, (M + t) / n + 1e-9);
    }
  }
}

TEST(ProductChain, Structure) {
  const MarkovChain c = chain(make_cycle(3));
  const MarkovChain p = product_chain(c);
  EXPECT_EQ(p.n(), 9u);
  EXPECT_EQ(p.rate(0 * 3 + 1, 1 * 3 + 1), c.rate(0, 1));
  EXPECT_EQ(p.rate(0 * 3 + 1, 0 * 3 + 2), c.rate(1, 2));
  EXPECT_EQ(p.rate(0 * 3 + 1, 1 * 3 + 2), 0.0);
  const auto d = diagonal_states(3);
  EXPECT_EQ(d, (std::vector<Vertex>{0, 4, 8}));
}
