#include "crw/crw_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "crw/error.hpp"
#include "crw/parallel.hpp"
#include "crw/uniformization.hpp"

namespace crw {

CoalescentState::CoalescentState(std::size_t n, std::span<const char> initial)
    : parent_(n), size_(n, 1), site_root_(n, kEmpty) {
  std::iota(parent_.begin(), parent_.end(), 0u);
  for (std::size_t v = 0; v < n; ++v)
    if (initial.empty() || initial[v]) {
      site_root_[v] = static_cast<std::uint32_t>(v);
      ++occupied_;
    }
  particles_ = occupied_;
}

CrwTrajectory simulate_crw(const RingSampler& rings, std::span<const double> t_grid, Rng& rng,
                           const CrwTracking& track) {
  const std::size_t n = rings.n();
  if (!track.initial.empty() && track.initial.size() != n)
    throw Error(ErrorCode::ParameterOutOfRange, "initial mask has the wrong length");
  if (!std::is_sorted(t_grid.begin(), t_grid.end()) || (!t_grid.empty() && t_grid.front() < 0.0))
    throw Error(ErrorCode::ParameterOutOfRange, "time grid must be sorted and nonnegative");
  CrwTrajectory out;
  out.iota = static_cast<Vertex>(rng.below(n));
  CoalescentState state(n, track.initial);
  const double lambda = rings.total_rate();
  // Once one cluster is left only its location changes, which matters only
  // when sites are tracked.
  const bool run_to_end = !track.sites.empty();
  // Ring counts per grid interval are Poisson, rings i.i.d. from the edge law.
  double previous = 0.0;
  for (double t : t_grid) {
    if (run_to_end || state.occupied() > 1) {
      const std::uint64_t rings_due = rng.poisson(lambda * (t - previous));
      for (std::uint64_t k = 0; k < rings_due && (run_to_end || state.occupied() > 1); ++k) {
        const auto [x, y] = rings.sample(rng);
        state.ring(x, y);
        ++state.event_count;
      }
    }
    state.clock = previous = t;
    out.t.push_back(t);
    out.xi_size.push_back(state.occupied());
    if (track.cluster) out.n_t.push_back(state.cluster_size(out.iota));
    if (!track.sites.empty()) {
      std::vector<char> occ(track.sites.size());
      for (std::size_t i = 0; i < track.sites.size(); ++i) occ[i] = state.is_occupied(track.sites[i]) ? 1 : 0;
      out.occupancy.push_back(std::move(occ));
    }
  }
  out.events = state.event_count;
  return out;
}

CrwTrajectory simulate_crw(const MarkovChain& c, std::span<const double> t_grid, Rng& rng,
                           const CrwTracking& track) {
  return simulate_crw(RingSampler(c), t_grid, rng, track);
}

DensityEstimate estimate_density(const MarkovChain& c, std::span<const double> t_grid, const McOptions& mc) {
  if (mc.reps < 2) throw Error(ErrorCode::EmptyEstimate, "density estimate needs reps >= 2");
  const RingSampler rings(c);
  const std::uint64_t key = stream_key("density");
  std::vector<std::vector<std::size_t>> sizes(mc.reps);
  parallel_for(mc.reps, mc.threads, [&](std::size_t i) {
    Rng rng(derive_seed(mc.seed, key, i));
    sizes[i] = simulate_crw(rings, t_grid, rng).xi_size;
  });

  DensityEstimate est;
  est.t_grid.assign(t_grid.begin(), t_grid.end());
  est.replicates = mc.reps;
  est.n = c.n();
  const double n = static_cast<double>(c.n());
  const double variance_slack = 4.0 * std::sqrt(2.0 / static_cast<double>(mc.reps - 1));
  std::vector<double> column(mc.reps);
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    for (std::size_t i = 0; i < mc.reps; ++i) column[i] = static_cast<double>(sizes[i][j]);
    const Summary s = summarize(column);
    est.p_hat.push_back(s.mean / n);
    est.std_error.push_back(s.std_error / n);
    const double ratio = s.variance / s.mean;
    est.variance_ratio.push_back(ratio);
    if (ratio > 1.0 + variance_slack) est.variance_bound_ok = false;
  }
  return est;
}

// ---------------------------------------------------------------------------
// Exact oracles

std::vector<double> exact_subset_law(const MarkovChain& c, double t) {
  const std::size_t n = c.n();
  if (n > 12) throw Error(ErrorCode::TooLargeForExact, "subset chain limited to n <= 12");
  if (t < 0.0) throw Error(ErrorCode::ParameterOutOfRange, "time must be nonnegative");
  const std::size_t states = (std::size_t{1} << n) - 1;
  std::vector<double> exit(states + 1, 0.0);
  double lambda = 0.0;
  for (Vertex x = 0; x < n; ++x) lambda += c.row_rate(x);
  for (std::size_t mask = 1; mask <= states; ++mask)
    for (Vertex x = 0; x < n; ++x)
      if (mask >> x & 1) exit[mask] += c.row_rate(x);

  Eigen::VectorXd init = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(states));
  init[static_cast<Eigen::Index>(states - 1)] = 1.0;
  const Eigen::VectorXd law = uniformize(
      init,
      [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        out.setZero();
        for (std::size_t mask = 1; mask <= states; ++mask) {
          const double p = in[static_cast<Eigen::Index>(mask - 1)];
          if (p == 0.0) continue;
          out[static_cast<Eigen::Index>(mask - 1)] += p * (1.0 - exit[mask] / lambda);
          for (Vertex x = 0; x < n; ++x) {
            if (!(mask >> x & 1)) continue;
            for (const Transition& tr : c.transitions(x)) {
              const std::size_t next = (mask & ~(std::size_t{1} << x)) | (std::size_t{1} << tr.to);
              out[static_cast<Eigen::Index>(next - 1)] += p * tr.rate / lambda;
            }
          }
        }
      },
      lambda, t, 1e-10);
  return {law.data(), law.data() + law.size()};
}

std::vector<double> exact_occupancy_density(const MarkovChain& c, double t) {
  const std::vector<double> law = exact_subset_law(c, t);
  std::vector<double> density(c.n(), 0.0);
  for (std::size_t mask = 1; mask <= law.size(); ++mask)
    for (std::size_t x = 0; x < c.n(); ++x)
      if (mask >> x & 1) density[x] += law[mask - 1];
  return density;
}

double exact_pair_covariance(const MarkovChain& c, Vertex x, Vertex y, double t) {
  if (x == y) throw Error(ErrorCode::SameVertex, "pair covariance needs distinct vertices");
  if (x >= c.n() || y >= c.n()) throw Error(ErrorCode::ParameterOutOfRange, "vertex out of range");
  const std::vector<double> law = exact_subset_law(c, t);
  double px = 0.0, py = 0.0, pxy = 0.0;
  for (std::size_t mask = 1; mask <= law.size(); ++mask) {
    const bool in_x = mask >> x & 1, in_y = mask >> y & 1;
    if (in_x) px += law[mask - 1];
    if (in_y) py += law[mask - 1];
    if (in_x && in_y) pxy += law[mask - 1];
  }
  return pxy - px * py;
}

KParticleLaw exact_k_particle_law(const MarkovChain& c, int k, double t, KStart start) {
  if (k < 1) throw Error(ErrorCode::ParameterOutOfRange, "k must be >= 1");
  if (t < 0.0) throw Error(ErrorCode::ParameterOutOfRange, "time must be nonnegative");
  const std::size_t n = c.n();
  const auto particles = static_cast<std::size_t>(k) + 1;
  double size = std::pow(static_cast<double>(n), static_cast<double>(particles));
  if (size > 20000.0) throw Error(ErrorCode::TooLargeForExact, "k-particle chain limited to n^(k+1) <= 20000");
  const auto states = static_cast<std::size_t>(std::llround(size));

  // Transitions as (from, to, rate) triples; a ring (x, y) moves every
  // coordinate sitting at x.
  struct Move {
    std::uint32_t to;
    double rate;
  };
  std::vector<std::size_t> offsets{0};
  std::vector<Move> moves;
  std::vector<double> stay(states);
  std::vector<char> coalesced(states), distinct(states);
  std::vector<std::size_t> coord(particles), power(particles);
  for (std::size_t i = 0; i < particles; ++i) power[i] = i == 0 ? 1 : power[i - 1] * n;
  const double lambda = static_cast<double>(particles) * c.r_max();
  for (std::size_t s = 0; s < states; ++s) {
    std::size_t rest = s;
    for (std::size_t i = 0; i < particles; ++i) {
      coord[i] = rest % n;
      rest /= n;
    }
    std::vector<std::size_t> sites(coord);
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    coalesced[s] = sites.size() == 1;
    distinct[s] = sites.size() == particles;
    double out_rate = 0.0;
    for (std::size_t x : sites) {
      std::size_t base = s;
      for (std::size_t i = 0; i < particles; ++i)
        if (coord[i] == x) base -= x * power[i];
      for (const Transition& tr : c.transitions(static_cast<Vertex>(x))) {
        std::size_t next = base;
        for (std::size_t i = 0; i < particles; ++i)
          if (coord[i] == x) next += tr.to * power[i];
        moves.push_back({static_cast<std::uint32_t>(next), tr.rate / lambda});
        out_rate += tr.rate;
      }
    }
    stay[s] = 1.0 - out_rate / lambda;
    offsets.push_back(moves.size());
  }

  Eigen::VectorXd init = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(states));
  for (std::size_t s = 0; s < states; ++s)
    if (start == KStart::PiTensor || distinct[s]) init[static_cast<Eigen::Index>(s)] = 1.0 / size;
  const Eigen::VectorXd law = uniformize(
      init,
      [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        for (std::size_t s = 0; s < states; ++s) out[static_cast<Eigen::Index>(s)] = in[static_cast<Eigen::Index>(s)] * stay[s];
        for (std::size_t s = 0; s < states; ++s) {
          const double p = in[static_cast<Eigen::Index>(s)];
          if (p == 0.0) continue;
          for (std::size_t m = offsets[s]; m < offsets[s + 1]; ++m) out[moves[m].to] += p * moves[m].rate;
        }
      },
      lambda, t, 1e-13);

  KParticleLaw result;
  for (std::size_t s = 0; s < states; ++s)
    if (coalesced[s]) result.probability += law[static_cast<Eigen::Index>(s)];
  result.expected_Ntk = std::pow(static_cast<double>(n), k) * result.probability;
  return result;
}

// ---------------------------------------------------------------------------
// Coalescence time, covariance

double sample_tau_coal(const RingSampler& rings, Rng& rng) {
  CoalescentState state(rings.n());
  while (state.occupied() > 1) {
    state.clock += rng.exponential(rings.total_rate());
    const auto [x, y] = rings.sample(rng);
    state.ring(x, y);
  }
  return state.clock;
}

std::vector<double> sample_tau_coal(const MarkovChain& c, const McOptions& mc) {
  const RingSampler rings(c);
  const std::uint64_t key = stream_key("tau_coal");
  std::vector<double> out(mc.reps);
  parallel_for(mc.reps, mc.threads, [&](std::size_t i) {
    Rng rng(derive_seed(mc.seed, key, i));
    out[i] = sample_tau_coal(rings, rng);
  });
  return out;
}

CovarianceEstimate pair_covariance(const MarkovChain& c, Vertex x, Vertex y, double t, const McOptions& mc) {
  if (x == y) throw Error(ErrorCode::SameVertex, "pair covariance needs distinct vertices");
  if (x >= c.n() || y >= c.n()) throw Error(ErrorCode::ParameterOutOfRange, "vertex out of range");
  const RingSampler rings(c);
  const std::uint64_t key = stream_key("pair_covariance");
  std::vector<double> ix(mc.reps), iy(mc.reps);
  const double grid[1] = {t};
  CrwTracking track;
  track.sites = {x, y};
  parallel_for(mc.reps, mc.threads, [&](std::size_t i) {
    Rng rng(derive_seed(mc.seed, key, i));
    const CrwTrajectory traj = simulate_crw(rings, grid, rng, track);
    ix[i] = traj.occupancy[0][0];
    iy[i] = traj.occupancy[0][1];
  });
  return jackknife_covariance(ix, iy);
}

}  // namespace crw
