#include "crw/voter.hpp"

#include <algorithm>
#include <cmath>

#include "crw/crw_sim.hpp"
#include "crw/error.hpp"
#include "crw/parallel.hpp"
#include "crw/stats.hpp"

namespace crw {

VoterState::VoterState(std::size_t n) : opinion_(n), count_(n, 1), distinct_(n) {
  for (std::size_t v = 0; v < n; ++v) opinion_[v] = static_cast<Vertex>(v);
}

VoterTrajectory simulate_voter(const RingSampler& rings, std::span<const double> t_grid, Rng& rng,
                               Vertex designated) {
  const std::size_t n = rings.n();
  if (designated >= n) throw Error(ErrorCode::ParameterOutOfRange, "designated vertex out of range");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()) || (!t_grid.empty() && t_grid.front() < 0.0))
    throw Error(ErrorCode::ParameterOutOfRange, "time grid must be sorted and nonnegative");
  VoterTrajectory out;
  out.u = static_cast<Vertex>(rng.below(n));
  out.x = designated;
  VoterState state(n);
  const double lambda = rings.total_rate();
  double previous = 0.0;
  for (double t : t_grid) {
    // With one opinion left every ring is a no-op.
    if (state.distinct_opinions() > 1) {
      const std::uint64_t rings_due = rng.poisson(lambda * (t - previous));
      for (std::uint64_t k = 0; k < rings_due && state.distinct_opinions() > 1; ++k) {
        const auto [x, y] = rings.sample(rng);
        state.ring(x, y);
      }
    }
    previous = t;
    out.t.push_back(t);
    out.nhat.push_back(state.holders(state.opinion(out.u)));
    out.n_u.push_back(state.holders(out.u));
    out.survives.push_back(state.holders(designated) > 0 ? 1 : 0);
    out.distinct.push_back(state.distinct_opinions());
  }
  return out;
}

VoterTrajectory simulate_voter(const MarkovChain& c, std::span<const double> t_grid, Rng& rng, Vertex designated) {
  return simulate_voter(RingSampler(c), t_grid, rng, designated);
}

std::vector<double> sample_voter_nhat(const MarkovChain& c, double t, const McOptions& mc) {
  const RingSampler rings(c);
  const std::uint64_t key = stream_key("voter_nhat");
  const double grid[1] = {t};
  std::vector<double> out(mc.reps);
  parallel_for(mc.reps, mc.threads, [&](std::size_t i) {
    Rng rng(derive_seed(mc.seed, key, i));
    out[i] = static_cast<double>(simulate_voter(rings, grid, rng).nhat[0]);
  });
  return out;
}

bool Gap::within(double sigmas) const {
  if (std_error == 0.0) return std::abs(gap) <= 1e-12;
  return std::abs(gap) <= sigmas * std_error;
}

namespace {

Gap paired_gap(std::span<const double> diff) {
  const Summary s = summarize(diff);
  return {s.mean, s.std_error};
}

Gap independent_gap(std::span<const double> a, std::span<const double> b) {
  const Summary sa = summarize(a), sb = summarize(b);
  return {sa.mean - sb.mean, std::sqrt(sa.std_error * sa.std_error + sb.std_error * sb.std_error)};
}

}  // namespace

DualityReport duality_gap(const MarkovChain& c, double t, const McOptions& mc, const DualityOptions& opts) {
  if (mc.reps < 2) throw Error(ErrorCode::EmptyEstimate, "duality check needs reps >= 2");
  if (opts.x >= c.n()) throw Error(ErrorCode::ParameterOutOfRange, "designated vertex out of range");
  const RingSampler rings(c);
  std::uint64_t crw_key = stream_key("duality_crw");
  std::uint64_t voter_key = stream_key("duality_voter");
  if (opts.swap_streams) std::swap(crw_key, voter_key);
  const double grid[1] = {t};
  const double n = static_cast<double>(c.n());
  const std::size_t reps = mc.reps;

  std::vector<double> density(reps), cluster(reps), occupied_x(reps);
  CrwTracking track;
  track.cluster = true;
  track.sites = {opts.x};
  parallel_for(reps, mc.threads, [&](std::size_t i) {
    Rng rng(derive_seed(mc.seed, crw_key, i));
    const CrwTrajectory traj = simulate_crw(rings, grid, rng, track);
    density[i] = static_cast<double>(traj.xi_size[0]) / n;
    cluster[i] = static_cast<double>(traj.n_t[0]);
    occupied_x[i] = traj.occupancy[0][0];
  });

  std::vector<double> nhat(reps), n_u(reps), survives(reps);
  parallel_for(reps, mc.threads, [&](std::size_t i) {
    Rng rng(derive_seed(mc.seed, voter_key, i));
    const VoterTrajectory traj = simulate_voter(rings, grid, rng, opts.x);
    nhat[i] = static_cast<double>(traj.nhat[0]);
    n_u[i] = static_cast<double>(traj.n_u[0]);
    survives[i] = traj.survives[0];
  });

  DualityReport report;
  report.t = t;
  report.replicates = reps;
  report.ks_nhat_vs_Nt = ks_two_sample(nhat, cluster);
  report.ks_threshold = dkw_bound_95(reps, reps) + 0.01;
  report.survival_vs_density = independent_gap(survives, occupied_x);

  std::vector<double> work(reps);
  for (std::size_t i = 0; i < reps; ++i) work[i] = density[i] - 1.0 / cluster[i];
  report.density_vs_inverse_N = paired_gap(work);

  for (int k = 1; k <= 4; ++k) {
    for (std::size_t i = 0; i < reps; ++i)
      work[i] = (nhat[i] == k ? 1.0 : 0.0) - (n_u[i] == k ? static_cast<double>(k) : 0.0);
    report.size_bias.push_back(paired_gap(work));
  }
  std::vector<double> other(reps);
  for (int m = 2; m <= 3; ++m) {
    for (std::size_t i = 0; i < reps; ++i) {
      work[i] = cluster[i] >= m ? 1.0 / cluster[i] : 0.0;
      other[i] = n_u[i] >= m ? 1.0 : 0.0;
    }
    report.tail_identity.push_back(independent_gap(work, other));
  }
  return report;
}

std::vector<MomentEstimate> normalized_moments(std::span<const double> samples, int kmax, std::uint64_t seed) {
  if (samples.empty()) throw Error(ErrorCode::EmptySamples, "no samples");
  if (kmax < 1) throw Error(ErrorCode::ParameterOutOfRange, "kmax must be >= 1");
  auto moments = [&](auto&& at) {
    KahanSum mean;
    for (std::size_t i = 0; i < samples.size(); ++i) mean.add(at(i));
    const double mu = mean.value() / static_cast<double>(samples.size());
    if (!(mu > 0.0)) throw Error(ErrorCode::EmptySamples, "sample mean must be positive");
    std::vector<KahanSum> sums(static_cast<std::size_t>(kmax));
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double z = at(i) / mu;
      double power = 1.0;
      for (int k = 1; k <= kmax; ++k) {
        power *= z;
        sums[static_cast<std::size_t>(k - 1)].add(power);
      }
    }
    std::vector<double> m;
    for (const auto& s : sums) m.push_back(s.value() / static_cast<double>(samples.size()));
    return m;
  };

  const std::vector<double> point = moments([&](std::size_t i) { return samples[i]; });
  constexpr int kResamples = 500;
  std::vector<std::vector<double>> boot(static_cast<std::size_t>(kmax));
  const std::uint64_t key = stream_key("bootstrap");
  std::vector<std::size_t> pick(samples.size());
  for (int b = 0; b < kResamples; ++b) {
    Rng rng(derive_seed(seed, key, static_cast<std::uint64_t>(b)));
    for (auto& p : pick) p = rng.below(samples.size());
    const std::vector<double> m = moments([&](std::size_t i) { return samples[pick[i]]; });
    for (int k = 0; k < kmax; ++k) boot[static_cast<std::size_t>(k)].push_back(m[static_cast<std::size_t>(k)]);
  }
  std::vector<MomentEstimate> out;
  for (int k = 1; k <= kmax; ++k) {
    auto& b = boot[static_cast<std::size_t>(k - 1)];
    std::sort(b.begin(), b.end());
    out.push_back({k, point[static_cast<std::size_t>(k - 1)], b[12], b[487]});
  }
  return out;
}

double gamma22_cdf(double x) {
  if (x <= 0.0) return 0.0;
  return 1.0 - std::exp(-2.0 * x) * (1.0 + 2.0 * x);
}

double gamma_ks(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptySamples, "no samples");
  KahanSum sum;
  for (double s : samples) sum.add(s);
  const double mu = sum.value() / static_cast<double>(samples.size());
  if (!(mu > 0.0)) throw Error(ErrorCode::EmptySamples, "sample mean must be positive");
  std::vector<double> z(samples.begin(), samples.end());
  for (double& v : z) v /= mu;
  return ks_one_sample(std::move(z), gamma22_cdf);
}

}  // namespace crw
