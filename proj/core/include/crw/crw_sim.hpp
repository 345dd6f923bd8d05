#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "crw/chain.hpp"
#include "crw/meeting.hpp"
#include "crw/rings.hpp"
#include "crw/rng.hpp"
#include "crw/stats.hpp"

namespace crw {

// Coalescing walks driven by the edge-ring stream: a ring (x, y) moves the
// cluster sitting at x (if any) to y and merges it with the cluster at y.
// Particle labels are the initial sites; clusters live in a union-find with
// union by size and path compression.
class CoalescentState {
 public:
  static constexpr std::uint32_t kEmpty = 0xffffffffu;

  // Every site occupied, or only the sites flagged in `initial`.
  explicit CoalescentState(std::size_t n, std::span<const char> initial = {});

  void ring(Vertex x, Vertex y) {
    const std::uint32_t moving = site_root_[x];
    if (moving == kEmpty) return;
    site_root_[x] = kEmpty;
    const std::uint32_t resident = site_root_[y];
    if (resident == kEmpty) {
      site_root_[y] = moving;
      return;
    }
    site_root_[y] = unite(moving, resident);
    --occupied_;
  }

  std::size_t occupied() const { return occupied_; }
  bool is_occupied(Vertex v) const { return site_root_[v] != kEmpty; }
  // Number of initial particles merged into the cluster of `label`.
  std::size_t cluster_size(Vertex label) { return size_[find(label)]; }
  std::size_t particle_count() const { return particles_; }
  double clock = 0.0;
  std::uint64_t event_count = 0;

 private:
  std::uint32_t find(std::uint32_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  std::uint32_t unite(std::uint32_t a, std::uint32_t b) {
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }

  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
  std::vector<std::uint32_t> site_root_;  // root label of the cluster at a site
  std::size_t occupied_ = 0;
  std::size_t particles_ = 0;
};

struct CrwTracking {
  bool cluster = false;       // record N_t for a uniform initial label iota
  std::vector<Vertex> sites;  // record occupancy of these sites
  // Start from the flagged sites only (empty: all sites). Used for coupling.
  std::vector<char> initial;
};

struct CrwTrajectory {
  std::vector<double> t;
  std::vector<std::size_t> xi_size;  // |xi_t|
  std::vector<std::size_t> n_t;      // N_t, when tracked
  std::vector<std::vector<char>> occupancy;  // per grid time, per tracked site
  Vertex iota = 0;
  std::uint64_t events = 0;
};

// One trajectory sampled at the (sorted, nonnegative) grid times. The label
// iota is drawn first from `rng` whether or not clusters are tracked.
CrwTrajectory simulate_crw(const RingSampler& rings, std::span<const double> t_grid, Rng& rng,
                           const CrwTracking& track = {});
CrwTrajectory simulate_crw(const MarkovChain& c, std::span<const double> t_grid, Rng& rng,
                           const CrwTracking& track = {});

struct DensityEstimate {
  std::vector<double> t_grid;
  std::vector<double> p_hat;      // mean of |xi_t| / n
  std::vector<double> std_error;  // replicate standard error of p_hat
  std::size_t replicates = 0;
  std::size_t n = 0;
  // Var(|xi_t|) / E|xi_t| per grid time, and whether it stays below
  // 1 + 4 standard errors of the variance estimate.
  std::vector<double> variance_ratio;
  bool variance_bound_ok = true;
};

DensityEstimate estimate_density(const MarkovChain& c, std::span<const double> t_grid, const McOptions& mc);

// Law of xi_t over nonempty subsets; entry mask - 1 holds P(xi_t = mask).
// Throws TooLargeForExact for n > 12.
std::vector<double> exact_subset_law(const MarkovChain& c, double t);
// P(x in xi_t) for every x.
std::vector<double> exact_occupancy_density(const MarkovChain& c, double t);
// Cov(1[x in xi_t], 1[y in xi_t]) from the subset law.
double exact_pair_covariance(const MarkovChain& c, Vertex x, Vertex y, double t);

enum class KStart { PiTensor, Distinct };

struct KParticleLaw {
  double probability = 0.0;  // P(C(X_0..X_k) <= t), joint with distinct starts in Distinct mode
  double expected_Ntk = 0.0;  // n^k * probability
};

// Labeled (k+1)-particle coalescing system on V^{k+1}. Throws
// TooLargeForExact when n^{k+1} > 20000.
KParticleLaw exact_k_particle_law(const MarkovChain& c, int k, double t, KStart start);

// First time a single cluster remains; 0 when n = 1.
double sample_tau_coal(const RingSampler& rings, Rng& rng);
std::vector<double> sample_tau_coal(const MarkovChain& c, const McOptions& mc);

// Sample covariance of the occupancy indicators of x and y, jackknife error.
// Throws SameVertex.
CovarianceEstimate pair_covariance(const MarkovChain& c, Vertex x, Vertex y, double t, const McOptions& mc);

}  // namespace crw
