#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crw/chain.hpp"
#include "crw/meeting.hpp"
#include "crw/rings.hpp"
#include "crw/rng.hpp"

namespace crw {

// Voter model on the edge-ring stream: a ring (x, y) makes y adopt the
// opinion of x. Opinions start as the vertex labels.
class VoterState {
 public:
  explicit VoterState(std::size_t n);

  void ring(Vertex x, Vertex y) {
    const Vertex from = opinion_[x], to = opinion_[y];
    if (from == to) return;
    opinion_[y] = from;
    ++count_[from];
    if (--count_[to] == 0) --distinct_;
  }

  Vertex opinion(Vertex v) const { return opinion_[v]; }
  // |zeta^label_t|: vertices holding the initial opinion of `label`.
  std::size_t holders(Vertex label) const { return count_[label]; }
  std::size_t distinct_opinions() const { return distinct_; }

 private:
  std::vector<Vertex> opinion_;
  std::vector<std::uint32_t> count_;
  std::size_t distinct_ = 0;
};

struct VoterTrajectory {
  std::vector<double> t;
  std::vector<std::size_t> nhat;      // size of the current opinion class of u
  std::vector<std::size_t> n_u;       // |zeta^u_t|
  std::vector<char> survives;         // 1[zeta^x_t nonempty] for the designated x
  std::vector<std::size_t> distinct;  // number of opinions alive
  Vertex u = 0;                       // uniform vertex, drawn first from rng
  Vertex x = 0;
};

VoterTrajectory simulate_voter(const RingSampler& rings, std::span<const double> t_grid, Rng& rng,
                               Vertex designated = 0);
VoterTrajectory simulate_voter(const MarkovChain& c, std::span<const double> t_grid, Rng& rng,
                               Vertex designated = 0);

// nhat_t at a single time for each replicate.
std::vector<double> sample_voter_nhat(const MarkovChain& c, double t, const McOptions& mc);

struct Gap {
  double gap = 0.0;        // signed difference of the two estimates
  double std_error = 0.0;
  bool within(double sigmas) const;
};

struct DualityReport {
  double t = 0.0;
  std::size_t replicates = 0;
  double ks_nhat_vs_Nt = 0.0;
  double ks_threshold = 0.0;  // 95% DKW band plus 0.01 discreteness slack
  Gap survival_vs_density;    // P(zeta^x_t nonempty) - P(x in xi_t)
  Gap density_vs_inverse_N;   // P_t - E(1/N_t), paired on the CRW runs
  // P(nhat_t = k) - k P(n_t = k) for k = 1..4, paired on the voter runs.
  std::vector<Gap> size_bias;
  // E(1/N_t 1[N_t >= M]) - P(n_t >= M) for M = 2, 3.
  std::vector<Gap> tail_identity;
};

struct DualityOptions {
  Vertex x = 0;
  bool swap_streams = false;  // exchange the CRW and voter seed streams
};

DualityReport duality_gap(const MarkovChain& c, double t, const McOptions& mc, const DualityOptions& opts = {});

struct MomentEstimate {
  int k = 0;
  double value = 0.0;
  double lower95 = 0.0;  // bootstrap percentile interval
  double upper95 = 0.0;
};

// m_k = mean((X / mean X)^k), k = 1..kmax, with 500 bootstrap resamples.
// Throws EmptySamples for empty input or a nonpositive mean.
std::vector<MomentEstimate> normalized_moments(std::span<const double> samples, int kmax,
                                               std::uint64_t seed = 1);

// F(x) = 1 - exp(-2x)(1 + 2x).
double gamma22_cdf(double x);
// One-sample KS distance of the mean-normalized samples to Gamma(2, 2).
double gamma_ks(std::span<const double> samples);

}  // namespace crw
