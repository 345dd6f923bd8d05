#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "crw/rng.hpp"

namespace crw {

using Vertex = std::uint32_t;

// Finite law on nonnegative integer degrees. Zero-probability entries are
// dropped and the support is kept sorted by degree.
class DegreeDistribution {
 public:
  struct Atom {
    int degree;
    double probability;
  };

  // Throws InvalidDistribution unless probabilities sum to 1 +- 1e-12 and all
  // degrees are nonnegative.
  explicit DegreeDistribution(std::vector<Atom> atoms);

  static DegreeDistribution point(int degree);
  static DegreeDistribution uniform(int lo, int hi);

  std::span<const Atom> support() const { return atoms_; }
  double mean() const { return mean_; }
  int min_degree() const { return atoms_.front().degree; }
  int max_degree() const { return atoms_.back().degree; }
  double probability(int degree) const;

  // The configuration-model theory assumes min degree >= 3.
  bool satisfies_min_degree_three() const { return min_degree() >= 3; }

  int sample(Rng& rng) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cumulative_;
  double mean_ = 0.0;
};

// D*(k) = (k+1) D(k+1) / sum_i i D(i). Throws ZeroMean.
DegreeDistribution size_biased(const DegreeDistribution& d);

enum class FamilyKind { Cycle, Torus, Complete, Hypercube };

// Vertex-transitive test-bed families; carried on the graph so spectra can be
// evaluated in closed form.
struct Family {
  FamilyKind kind;
  int dimension = 1;  // torus / hypercube dimension
  int side = 0;       // cycle length, torus side, complete-graph size

  static Family cycle(int n) { return {FamilyKind::Cycle, 1, n}; }
  static Family torus(int d, int side) { return {FamilyKind::Torus, d, side}; }
  static Family complete(int n) { return {FamilyKind::Complete, 1, n}; }
  static Family hypercube(int d) { return {FamilyKind::Hypercube, d, 2}; }
};

struct Neighbor {
  Vertex vertex;
  std::uint32_t multiplicity;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct EdgeLine {
  Vertex u;
  Vertex v;
  std::uint32_t multiplicity;

  friend bool operator==(const EdgeLine&, const EdgeLine&) = default;
};

// Undirected multigraph in compressed adjacency form. Construction drops
// self-loops and merges repeated pairs into one entry with summed
// multiplicity, so adjacency lists are sorted and duplicate-free.
class Graph {
 public:
  Graph() = default;
  Graph(std::size_t n, std::span<const EdgeLine> edges);

  std::size_t n() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<const Neighbor> neighbors(Vertex v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  // Total degree counted with multiplicity.
  std::uint64_t degree(Vertex v) const { return degree_[v]; }
  std::uint64_t d_max() const { return d_max_; }
  std::uint64_t d_min() const { return d_min_; }
  bool is_regular() const { return d_max_ == d_min_; }
  // Number of distinct undirected vertex pairs (lines in the text format).
  std::size_t edge_line_count() const { return adjacency_.size() / 2; }
  // Sum of multiplicities over undirected pairs.
  std::uint64_t total_multiplicity() const;
  std::vector<EdgeLine> edge_lines() const;

  const std::optional<Vertex>& root() const { return root_; }
  void set_root(Vertex r) { root_ = r; }
  const std::optional<Family>& family() const { return family_; }
  void set_family(Family f) { family_ = f; }
  bool is_transitive() const { return family_.has_value(); }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
  std::vector<std::uint64_t> degree_;
  std::uint64_t d_max_ = 0;
  std::uint64_t d_min_ = 0;
  std::optional<Vertex> root_;
  std::optional<Family> family_;
};

struct ConfigurationModelOptions {
  bool require_connected = false;
  int max_retries = 1000;
  // Replace every multi-edge by a single unit edge instead of keeping the
  // multiplicity as a jump rate.
  bool collapse_multiedges = false;
};

// Degrees i.i.d. from D, whole sequence resampled until the sum is even;
// half-edges matched uniformly; self-loops dropped. With require_connected the
// whole graph is resampled until connected.
Graph sample_configuration_model(const DegreeDistribution& d, std::size_t n, Rng& rng,
                                 const ConfigurationModelOptions& opts = {});

// Truncated unimodular Galton-Watson tree: root offspring ~ D, other vertices
// ~ D*, vertices at `depth` are leaves. Labels are breadth-first, root = 0.
Graph sample_ugt(const DegreeDistribution& d, int depth, Rng& rng);

Graph make_transitive(const Family& family);
Graph make_cycle(int n);
Graph make_torus(int dimension, int side);
Graph make_complete(int n);
Graph make_hypercube(int dimension);
// Path on n vertices; not transitive for n > 2.
Graph make_path(int n);

bool is_connected(const Graph& g);

// min over 0 < |S| <= n/2 of |out-boundary(S)| / |S| by subset enumeration.
// Throws TooLargeForExact for n > 20.
double vertex_expansion_exact(const Graph& g);

// Text format: header `crwgraph v1 <n> <m_lines>`, then `u v mult` per
// undirected pair with u < v, 0-based.
void write_graph(std::ostream& out, const Graph& g);
Graph read_graph(std::istream& in);

}  // namespace crw
