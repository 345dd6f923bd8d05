#include "crw/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crw/crw_sim.hpp"
#include "crw/error.hpp"
#include "crw/parallel.hpp"
#include "crw/stats.hpp"
#include "crw/walk.hpp"
#include "json.hpp"

namespace crw {

MeanField mean_field_predictions(double n, double t, double t_meet, double alpha_t) {
  if (!(t > 0.0)) throw Error(ErrorCode::NonpositiveTime, "prediction time must be positive");
  if (!(alpha_t > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "alpha_t must be positive");
  if (!(n > 0.0) || !(t_meet > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "n and t_meet must be positive");
  return {1.0 / (t * alpha_t), 2.0 * t_meet / (t * n)};
}

double bg_prediction(int d, double t, std::optional<double> psi) {
  if (d < 1) throw Error(ErrorCode::ParameterOutOfRange, "dimension must be >= 1");
  if (!(t > 0.0)) throw Error(ErrorCode::NonpositiveTime, "prediction time must be positive");
  if (d == 1) return 1.0 / std::sqrt(std::numbers::pi * t);
  if (d == 2) {
    if (!(t > 1.0)) throw Error(ErrorCode::ParameterOutOfRange, "d = 2 needs t > 1");
    return std::log(t) / (std::numbers::pi * t);
  }
  if (!psi) throw Error(ErrorCode::MissingPsi, "d >= 3 needs an escape probability");
  if (!(*psi > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "escape probability must be positive");
  return 1.0 / (*psi * t);
}

PsiEstimate estimate_psi_d(int d, std::uint64_t horizon_steps, const McOptions& mc) {
  if (d < 1) throw Error(ErrorCode::ParameterOutOfRange, "dimension must be >= 1");
  if (mc.reps == 0) throw Error(ErrorCode::EmptyEstimate, "psi estimate needs reps >= 1");
  const std::uint64_t key = stream_key("psi");
  std::vector<double> escaped(mc.reps);
  parallel_for(mc.reps, mc.threads, [&](std::size_t i) {
    Rng rng(derive_seed(mc.seed, key, i));
    std::vector<std::int64_t> x(static_cast<std::size_t>(d), 0);
    std::uint64_t l1 = 0;
    for (std::uint64_t step = 0; step < horizon_steps; ++step) {
      // Too far away to come back within the remaining steps.
      if (l1 > horizon_steps - step) break;
      const std::uint64_t move = rng.below(2 * static_cast<std::uint64_t>(d));
      std::int64_t& c = x[move >> 1];
      const std::int64_t before = c;
      c += (move & 1) ? 1 : -1;
      if (std::abs(c) > std::abs(before))
        ++l1;
      else
        --l1;
      if (l1 == 0) {
        escaped[i] = 0.0;
        return;
      }
    }
    escaped[i] = 1.0;
  });
  const Summary s = summarize(escaped);
  return {s.mean, s.std_error, true};
}

namespace {

// Unimodular Galton-Watson tree grown on demand: a vertex's child count is
// drawn when the vertex is created, the children themselves when a walker
// first steps down from it.
class LazyTree {
 public:
  LazyTree(const DegreeDistribution& root_law, const DegreeDistribution& offspring_law, Rng& rng)
      : offspring_(&offspring_law) {
    nodes_.push_back({kNone, 0, root_law.sample(rng), kNone});
  }

  int degree(std::uint32_t v) const { return nodes_[v].children + (v == 0 ? 0 : 1); }
  int depth(std::uint32_t v) const { return nodes_[v].depth; }

  std::uint32_t neighbor(std::uint32_t v, int index, Rng& rng) {
    if (v != 0) {
      if (index == 0) return nodes_[v].parent;
      --index;
    }
    if (nodes_[v].first_child == kNone) {
      const auto first = static_cast<std::uint32_t>(nodes_.size());
      const int count = nodes_[v].children;
      const int child_depth = nodes_[v].depth + 1;
      for (int c = 0; c < count; ++c) nodes_.push_back({v, child_depth, offspring_->sample(rng), kNone});
      nodes_[v].first_child = first;
    }
    return nodes_[v].first_child + static_cast<std::uint32_t>(index);
  }

  std::uint32_t step(std::uint32_t v, Rng& rng) {
    return neighbor(v, static_cast<int>(rng.below(static_cast<std::uint64_t>(degree(v)))), rng);
  }

 private:
  static constexpr std::uint32_t kNone = 0xffffffffu;
  struct Node {
    std::uint32_t parent;
    int depth;
    int children;
    std::uint32_t first_child;
  };
  const DegreeDistribution* offspring_;
  std::vector<Node> nodes_;
};

}  // namespace

AlphaDEstimate estimate_alpha_D(const DegreeDistribution& d, int depth, double t_horizon, const McOptions& mc) {
  if (depth < 3) throw Error(ErrorCode::DegenerateDepth, "alpha(D) needs depth >= 3");
  if (!(t_horizon > 0.0)) throw Error(ErrorCode::NonpositiveTime, "horizon must be positive");
  if (mc.reps < 2) throw Error(ErrorCode::EmptyEstimate, "alpha(D) estimate needs reps >= 2");
  const DegreeDistribution offspring = size_biased(d);
  const std::uint64_t key = stream_key("alpha_D");
  enum Outcome : char { Met, Exited, Censored, Isolated };
  std::vector<double> weight(mc.reps);
  std::vector<char> outcome(mc.reps);
  parallel_for(mc.reps, mc.threads, [&](std::size_t i) {
    Rng rng(derive_seed(mc.seed, key, i));
    LazyTree tree(d, offspring, rng);
    weight[i] = tree.degree(0);
    if (tree.degree(0) == 0) {
      outcome[i] = Isolated;
      return;
    }
    std::uint32_t a = 0;
    std::uint32_t b = tree.step(0, rng);
    double clock = 0.0;
    for (;;) {
      const double ra = tree.degree(a), rb = tree.degree(b);
      clock += rng.exponential(ra + rb);
      if (clock > t_horizon) {
        outcome[i] = Censored;
        return;
      }
      std::uint32_t& mover = rng.uniform() * (ra + rb) < ra ? a : b;
      mover = tree.step(mover, rng);
      if (a == b) {
        outcome[i] = Met;
        return;
      }
      if (tree.depth(mover) > depth) {
        outcome[i] = Exited;
        return;
      }
    }
  });

  std::vector<double> upper(mc.reps), lower(mc.reps);
  std::size_t censored = 0, exited = 0;
  for (std::size_t i = 0; i < mc.reps; ++i) {
    upper[i] = (outcome[i] == Exited || outcome[i] == Censored) ? weight[i] : 0.0;
    lower[i] = outcome[i] == Exited ? weight[i] : 0.0;
    censored += outcome[i] == Censored;
    exited += outcome[i] == Exited;
  }
  const Summary su = summarize(upper), sl = summarize(lower);
  AlphaDEstimate est;
  est.alpha_hat = su.mean;
  est.std_error = su.std_error;
  est.upper = su.mean;
  est.lower = sl.mean;
  est.censored_fraction = static_cast<double>(censored) / static_cast<double>(mc.reps);
  est.exited_fraction = static_cast<double>(exited) / static_cast<double>(mc.reps);
  return est;
}

KingmanSamples kingman_tau_coal(int n, double M, const McOptions& mc) {
  if (n < 2 || !(M > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "Kingman sampler needs n >= 2 and M > 0");
  const std::uint64_t key = stream_key("kingman");
  KingmanSamples out;
  out.samples.resize(mc.reps);
  parallel_for(mc.reps, mc.threads, [&](std::size_t i) {
    Rng rng(derive_seed(mc.seed, key, i));
    double total = 0.0;
    for (int k = n; k >= 2; --k) total += rng.exponential(1.0) / (0.5 * k * (k - 1));
    out.samples[i] = M * total;
  });
  out.analytic_mean = 2.0 * M * (1.0 - 1.0 / n);
  return out;
}

std::vector<BranchingPattern> enumerate_patterns(int k) {
  if (k < 1 || k > 6) throw Error(ErrorCode::KTooLarge, "patterns enumerated for 1 <= k <= 6");
  std::vector<BranchingPattern> out;
  BranchingPattern current(static_cast<std::size_t>(k) + 1, 0);
  auto fill = [&](auto&& self, int level) -> void {
    if (level > k) {
      out.push_back(current);
      return;
    }
    for (int i = 0; i < level; ++i) {
      current[static_cast<std::size_t>(level)] = i;
      self(self, level + 1);
    }
  };
  fill(fill, 1);
  return out;
}

BranchingEstimate branching_integral_mc(const MarkovChain& c, int k, double t, const McOptions& mc) {
  if (k > 3) throw Error(ErrorCode::KTooLarge, "branching estimator limited to k <= 3");
  if (k < 1) throw Error(ErrorCode::ParameterOutOfRange, "k must be >= 1");
  if (t < 0.0) throw Error(ErrorCode::ParameterOutOfRange, "time must be nonnegative");
  if (mc.reps < 2) throw Error(ErrorCode::EmptyEstimate, "branching estimate needs reps >= 2");
  if (t == 0.0) return {};
  const WalkKernel kernel(c);
  const std::uint64_t key = stream_key("branching");
  const auto walkers = static_cast<std::size_t>(k) + 1;
  std::vector<double> score(mc.reps);
  parallel_for(mc.reps, mc.threads, [&](std::size_t r) {
    Rng rng(derive_seed(mc.seed, key, r));
    std::vector<double> times(static_cast<std::size_t>(k));
    for (double& s : times) s = rng.uniform(0.0, t);
    std::sort(times.begin(), times.end());
    std::vector<int> parent(walkers, 0);
    for (std::size_t l = 1; l < walkers; ++l) parent[l] = static_cast<int>(rng.below(l));
    times.push_back(t);

    std::vector<Vertex> pos(walkers);
    std::size_t alive = 1;
    auto occupied = [&](Vertex v, std::size_t skip) {
      for (std::size_t j = 0; j < alive; ++j)
        if (j != skip && pos[j] == v) return true;
      return false;
    };
    // gamma_0 is stationary, so its position at the first branching time is uniform.
    pos[0] = static_cast<Vertex>(rng.below(c.n()));
    double clock = times[0];
    double weight = 1.0;
    for (std::size_t l = 1; l <= walkers; ++l) {
      if (l > 1) {
        const double until = times[l - 1];
        for (;;) {
          double total = 0.0;
          for (std::size_t j = 0; j < alive; ++j) total += c.row_rate(pos[j]);
          clock += rng.exponential(total);
          if (clock > until) break;
          double u = rng.uniform() * total;
          std::size_t w = 0;
          while (w + 1 < alive && u >= c.row_rate(pos[w])) u -= c.row_rate(pos[w++]);
          const Vertex next = kernel.step(pos[w], rng);
          if (occupied(next, w)) {
            score[r] = 0.0;
            return;
          }
          pos[w] = next;
        }
        clock = until;
      }
      if (l == walkers) break;
      const Vertex a = pos[static_cast<std::size_t>(parent[l])];
      weight *= c.row_rate(a);
      const Vertex b = kernel.step(a, rng);
      if (occupied(b, walkers)) {
        score[r] = 0.0;
        return;
      }
      pos[alive++] = b;
    }
    score[r] = weight;
  });
  const Summary s = summarize(score);
  const double volume = std::pow(t, k);
  return {volume * s.mean, volume * s.std_error};
}

ReversalResidual reversal_identity_residual(const MarkovChain& c, int k, double t, const McOptions& mc) {
  ReversalResidual out;
  out.rhs = exact_k_particle_law(c, k, t, KStart::Distinct).expected_Ntk;
  const BranchingEstimate est = branching_integral_mc(c, k, t, mc);
  double factorial = 1.0;
  for (int i = 2; i <= k + 1; ++i) factorial *= i;
  out.lhs = factorial * est.estimate;
  out.lhs_error = factorial * est.std_error;
  const double diff = std::abs(out.lhs - out.rhs);
  if (out.lhs_error > 0.0)
    out.residual = diff / out.lhs_error;
  else
    out.residual = diff <= 1e-12 ? 0.0 : INFINITY;
  return out;
}

std::string predictions_to_json(const std::vector<Prediction>& records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Prediction& p : records) {
    nlohmann::ordered_json rec;
    rec["label"] = p.label;
    rec["value"] = p.value;
    rec["inputs"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : p.inputs) rec["inputs"][name] = value;
    if (p.std_error) rec["stderr"] = *p.std_error;
    arr.push_back(std::move(rec));
  }
  return arr.dump(2);
}

}  // namespace crw
