#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crw/chain.hpp"
#include "crw/graph.hpp"
#include "crw/meeting.hpp"

namespace crw {

struct MeanField {
  double A1 = 0.0;  // 1 / (t alpha_t)
  double A2 = 0.0;  // 2 t_meet / (t n)
};

// Throws NonpositiveTime for t <= 0, ParameterOutOfRange for alpha_t <= 0.
MeanField mean_field_predictions(double n, double t, double t_meet, double alpha_t);

// Lattice density decay: d = 1 -> 1/sqrt(pi t); d = 2 -> log t / (pi t);
// d >= 3 -> 1 / (psi t). Throws MissingPsi for d >= 3 without psi.
double bg_prediction(int d, double t, std::optional<double> psi = std::nullopt);

struct PsiEstimate {
  double psi_hat = 0.0;
  double std_error = 0.0;
  // Walks that have not returned by the horizon count as escapes, so the
  // estimate is biased upward by P(first return after the horizon).
  bool upward_biased = true;
};

// Fraction of simple-random-walk jump paths on Z^d with no return to the
// origin within horizon_steps.
PsiEstimate estimate_psi_d(int d, std::uint64_t horizon_steps, const McOptions& mc);

struct AlphaDEstimate {
  double alpha_hat = 0.0;
  double std_error = 0.0;
  // Bracket from scoring pairs still inside the ball at the horizon as met
  // (lower) or as surviving (upper); alpha_hat uses the upper convention.
  double lower = 0.0;
  double upper = 0.0;
  double censored_fraction = 0.0;  // still inside the ball at the horizon
  double exited_fraction = 0.0;    // left the ball unmet
};

// Two walkers from the root and a uniform root neighbour on lazily grown
// UGT(D) samples, weighted by the root degree. Throws DegenerateDepth for
// depth < 3.
AlphaDEstimate estimate_alpha_D(const DegreeDistribution& d, int depth, double t_horizon, const McOptions& mc);

struct KingmanSamples {
  std::vector<double> samples;
  double analytic_mean = 0.0;  // 2 M (1 - 1/n)
};

// M * sum_{k=2}^n tau_k / C(k, 2), tau_k i.i.d. Exp(1). Throws
// ParameterOutOfRange unless n >= 2 and M > 0.
KingmanSamples kingman_tau_coal(int n, double M, const McOptions& mc);

using BranchingPattern = std::vector<int>;

// All [i_0, ..., i_k] with i_0 = 0 and 0 <= i_l <= l - 1, lexicographic.
// Throws KTooLarge outside 1 <= k <= 6.
std::vector<BranchingPattern> enumerate_patterns(int k);

struct BranchingEstimate {
  double estimate = 0.0;  // of sum over patterns of the simplex integral of h
  double std_error = 0.0;
};

// Throws KTooLarge for k > 3.
BranchingEstimate branching_integral_mc(const MarkovChain& c, int k, double t, const McOptions& mc);

struct ReversalResidual {
  double lhs = 0.0;        // (k+1)! times the branching estimate
  double lhs_error = 0.0;  // its standard error
  double rhs = 0.0;        // n^k P(C <= t, distinct starts), exact
  double residual = 0.0;   // |lhs - rhs| / lhs_error; 0 when both sides agree exactly
};

ReversalResidual reversal_identity_residual(const MarkovChain& c, int k, double t, const McOptions& mc);

struct Prediction {
  std::string label;  // "A1", "A2", "BG(d)", "Kingman"
  double value = 0.0;
  std::map<std::string, double> inputs;
  std::optional<double> std_error;
};

std::string predictions_to_json(const std::vector<Prediction>& records);

}  // namespace crw
