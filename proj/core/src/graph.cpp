#include "crw/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "crw/error.hpp"

namespace crw {

// ---------------------------------------------------------------------------
// DegreeDistribution

DegreeDistribution::DegreeDistribution(std::vector<Atom> atoms) {
  std::erase_if(atoms, [](const Atom& a) { return a.probability == 0.0; });
  if (atoms.empty()) throw Error(ErrorCode::InvalidDistribution, "empty support");
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.degree < b.degree; });
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Atom& a = atoms[i];
    if (a.degree < 0) throw Error(ErrorCode::InvalidDistribution, "negative degree " + std::to_string(a.degree));
    if (a.probability < 0.0 || !std::isfinite(a.probability))
      throw Error(ErrorCode::InvalidDistribution, "bad probability for degree " + std::to_string(a.degree));
    if (i > 0 && atoms[i - 1].degree == a.degree)
      throw Error(ErrorCode::InvalidDistribution, "repeated degree " + std::to_string(a.degree));
    total += a.probability;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << total;
    throw Error(ErrorCode::InvalidDistribution, msg.str());
  }
  atoms_ = std::move(atoms);
  cumulative_.reserve(atoms_.size());
  double c = 0.0;
  for (const Atom& a : atoms_) {
    c += a.probability;
    cumulative_.push_back(c);
    mean_ += a.degree * a.probability;
  }
  cumulative_.back() = 1.0;
}

DegreeDistribution DegreeDistribution::point(int degree) { return DegreeDistribution({{degree, 1.0}}); }

DegreeDistribution DegreeDistribution::uniform(int lo, int hi) {
  if (hi < lo) throw Error(ErrorCode::InvalidDistribution, "uniform with hi < lo");
  std::vector<Atom> atoms;
  const double p = 1.0 / (hi - lo + 1);
  for (int k = lo; k <= hi; ++k) atoms.push_back({k, p});
  // Absorb rounding so the sum check is exact to 1e-12.
  double rest = 1.0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) rest -= atoms[i].probability;
  atoms.back().probability = rest;
  return DegreeDistribution(std::move(atoms));
}

double DegreeDistribution::probability(int degree) const {
  for (const Atom& a : atoms_)
    if (a.degree == degree) return a.probability;
  return 0.0;
}

int DegreeDistribution::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), atoms_.size() - 1);
  return atoms_[idx].degree;
}

DegreeDistribution size_biased(const DegreeDistribution& d) {
  if (!(d.mean() > 0.0)) throw Error(ErrorCode::ZeroMean, "size-biasing needs a positive mean");
  std::vector<DegreeDistribution::Atom> atoms;
  double total = 0.0;
  for (const auto& a : d.support()) {
    if (a.degree == 0) continue;
    atoms.push_back({a.degree - 1, a.degree * a.probability / d.mean()});
    total += atoms.back().probability;
  }
  // Renormalize away accumulated rounding; the exact law sums to one.
  for (auto& a : atoms) a.probability /= total;
  return DegreeDistribution(std::move(atoms));
}

// ---------------------------------------------------------------------------
// Graph

Graph::Graph(std::size_t n, std::span<const EdgeLine> edges) {
  struct Directed {
    Vertex from, to;
    std::uint64_t mult;
  };
  std::vector<Directed> dir;
  dir.reserve(2 * edges.size());
  for (const EdgeLine& e : edges) {
    if (e.u >= n || e.v >= n) throw Error(ErrorCode::ParameterOutOfRange, "edge endpoint out of range");
    if (e.u == e.v || e.multiplicity == 0) continue;
    dir.push_back({e.u, e.v, e.multiplicity});
    dir.push_back({e.v, e.u, e.multiplicity});
  }
  std::sort(dir.begin(), dir.end(), [](const Directed& a, const Directed& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });
  offsets_.assign(n + 1, 0);
  degree_.assign(n, 0);
  for (std::size_t i = 0; i < dir.size();) {
    std::size_t j = i;
    std::uint64_t mult = 0;
    while (j < dir.size() && dir[j].from == dir[i].from && dir[j].to == dir[i].to) mult += dir[j++].mult;
    adjacency_.push_back({dir[i].to, static_cast<std::uint32_t>(mult)});
    ++offsets_[dir[i].from + 1];
    degree_[dir[i].from] += mult;
    i = j;
  }
  std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
  if (n > 0) {
    d_max_ = *std::max_element(degree_.begin(), degree_.end());
    d_min_ = *std::min_element(degree_.begin(), degree_.end());
  }
}

std::uint64_t Graph::total_multiplicity() const {
  std::uint64_t total = 0;
  for (std::uint64_t d : degree_) total += d;
  return total / 2;
}

std::vector<EdgeLine> Graph::edge_lines() const {
  std::vector<EdgeLine> out;
  out.reserve(edge_line_count());
  for (Vertex u = 0; u < n(); ++u)
    for (const Neighbor& nb : neighbors(u))
      if (u < nb.vertex) out.push_back({u, nb.vertex, nb.multiplicity});
  return out;
}

// ---------------------------------------------------------------------------
// Random graphs

Graph sample_configuration_model(const DegreeDistribution& d, std::size_t n, Rng& rng,
                                 const ConfigurationModelOptions& opts) {
  if (n < 2) throw Error(ErrorCode::ParameterOutOfRange, "configuration model needs n >= 2");
  if (!(d.mean() > 0.0)) throw Error(ErrorCode::ZeroMean, "degree distribution has zero mean");
  if (opts.max_retries < 1) throw Error(ErrorCode::ParameterOutOfRange, "max_retries must be >= 1");

  std::vector<int> degrees(n);
  std::vector<Vertex> stubs;
  std::vector<EdgeLine> edges;
  for (int attempt = 0; attempt < opts.max_retries; ++attempt) {
    std::uint64_t sum = 0;
    int parity_tries = 0;
    for (;;) {
      sum = 0;
      for (auto& deg : degrees) {
        deg = d.sample(rng);
        sum += static_cast<std::uint64_t>(deg);
      }
      if (sum % 2 == 0) break;
      if (++parity_tries >= opts.max_retries)
        throw Error(ErrorCode::InfeasibleDegreeSequence,
                    "degree sum stayed odd after " + std::to_string(opts.max_retries) + " draws");
    }

    stubs.clear();
    stubs.reserve(sum);
    for (Vertex v = 0; v < n; ++v) stubs.insert(stubs.end(), static_cast<std::size_t>(degrees[v]), v);
    for (std::size_t i = stubs.size(); i > 1; --i) std::swap(stubs[i - 1], stubs[rng.below(i)]);

    edges.clear();
    edges.reserve(stubs.size() / 2);
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
      Vertex a = stubs[i], b = stubs[i + 1];
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      edges.push_back({a, b, 1});
    }
    if (opts.collapse_multiedges) {
      std::sort(edges.begin(), edges.end(), [](const EdgeLine& x, const EdgeLine& y) {
        return x.u != y.u ? x.u < y.u : x.v < y.v;
      });
      edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }
    Graph g(n, edges);
    if (!opts.require_connected || is_connected(g)) return g;
  }
  throw Error(ErrorCode::NotConnectedAfterRetries,
              "no connected sample in " + std::to_string(opts.max_retries) + " attempts");
}

Graph sample_ugt(const DegreeDistribution& d, int depth, Rng& rng) {
  if (depth < 0) throw Error(ErrorCode::ParameterOutOfRange, "depth must be >= 0");
  const DegreeDistribution offspring = size_biased(d);
  std::vector<EdgeLine> edges;
  std::vector<int> level{0};
  std::size_t count = 1;
  for (std::size_t head = 0; head < count; ++head) {
    if (level[head] >= depth) continue;
    const int children = head == 0 ? d.sample(rng) : offspring.sample(rng);
    for (int c = 0; c < children; ++c) {
      edges.push_back({static_cast<Vertex>(head), static_cast<Vertex>(count), 1});
      level.push_back(level[head] + 1);
      ++count;
    }
  }
  Graph g(count, edges);
  g.set_root(0);
  return g;
}

// ---------------------------------------------------------------------------
// Transitive families

Graph make_torus(int dimension, int side) {
  if (dimension < 1 || side < 3) throw Error(ErrorCode::ParameterOutOfRange, "torus needs d >= 1 and L >= 3");
  const double size = std::pow(static_cast<double>(side), dimension);
  if (size > 5e7) throw Error(ErrorCode::ParameterOutOfRange, "torus too large");
  const auto n = static_cast<std::size_t>(std::llround(size));
  std::vector<EdgeLine> edges;
  edges.reserve(n * static_cast<std::size_t>(dimension));
  // Coordinate j has stride side^(d-1-j): first coordinate most significant.
  std::vector<std::size_t> stride(static_cast<std::size_t>(dimension));
  std::size_t s = 1;
  for (int j = dimension - 1; j >= 0; --j) {
    stride[static_cast<std::size_t>(j)] = s;
    s *= static_cast<std::size_t>(side);
  }
  for (std::size_t v = 0; v < n; ++v) {
    for (int j = 0; j < dimension; ++j) {
      const std::size_t st = stride[static_cast<std::size_t>(j)];
      const std::size_t coord = (v / st) % static_cast<std::size_t>(side);
      const std::size_t w = coord + 1 == static_cast<std::size_t>(side) ? v - coord * st : v + st;
      edges.push_back({static_cast<Vertex>(std::min(v, w)), static_cast<Vertex>(std::max(v, w)), 1});
    }
  }
  Graph g(n, edges);
  g.set_family(dimension == 1 ? Family::cycle(side) : Family::torus(dimension, side));
  return g;
}

Graph make_cycle(int n) {
  if (n < 3) throw Error(ErrorCode::ParameterOutOfRange, "cycle needs n >= 3");
  return make_torus(1, n);
}

Graph make_complete(int n) {
  if (n < 2) throw Error(ErrorCode::ParameterOutOfRange, "complete graph needs n >= 2");
  std::vector<EdgeLine> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v), 1});
  Graph g(static_cast<std::size_t>(n), edges);
  g.set_family(Family::complete(n));
  return g;
}

Graph make_hypercube(int dimension) {
  if (dimension < 1 || dimension > 24) throw Error(ErrorCode::ParameterOutOfRange, "hypercube needs 1 <= d <= 24");
  const std::size_t n = std::size_t{1} << dimension;
  std::vector<EdgeLine> edges;
  for (std::size_t v = 0; v < n; ++v)
    for (int j = 0; j < dimension; ++j) {
      const std::size_t w = v ^ (std::size_t{1} << j);
      if (v < w) edges.push_back({static_cast<Vertex>(v), static_cast<Vertex>(w), 1});
    }
  Graph g(n, edges);
  g.set_family(Family::hypercube(dimension));
  return g;
}

Graph make_transitive(const Family& family) {
  switch (family.kind) {
    case FamilyKind::Cycle: return make_cycle(family.side);
    case FamilyKind::Torus: return make_torus(family.dimension, family.side);
    case FamilyKind::Complete: return make_complete(family.side);
    case FamilyKind::Hypercube: return make_hypercube(family.dimension);
  }
  throw Error(ErrorCode::ParameterOutOfRange, "unknown family");
}

Graph make_path(int n) {
  if (n < 1) throw Error(ErrorCode::ParameterOutOfRange, "path needs n >= 1");
  std::vector<EdgeLine> edges;
  for (int v = 0; v + 1 < n; ++v) edges.push_back({static_cast<Vertex>(v), static_cast<Vertex>(v + 1), 1});
  Graph g(static_cast<std::size_t>(n), edges);
  if (n == 2) g.set_family(Family::complete(2));
  return g;
}

// ---------------------------------------------------------------------------
// Structure queries

bool is_connected(const Graph& g) {
  const std::size_t n = g.n();
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::vector<Vertex> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    for (const Neighbor& nb : g.neighbors(v))
      if (!seen[nb.vertex]) {
        seen[nb.vertex] = 1;
        ++reached;
        stack.push_back(nb.vertex);
      }
  }
  return reached == n;
}

double vertex_expansion_exact(const Graph& g) {
  const std::size_t n = g.n();
  if (n > 20) throw Error(ErrorCode::TooLargeForExact, "vertex expansion enumerates 2^n subsets; n <= 20");
  if (n < 2) return std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> adj(n, 0);
  for (Vertex v = 0; v < n; ++v)
    for (const Neighbor& nb : g.neighbors(v)) adj[v] |= 1u << nb.vertex;
  const std::uint32_t full = (1u << n) - 1;
  std::vector<std::uint32_t> reach(std::size_t{1} << n, 0);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t s = 1; s <= full; ++s) {
    reach[s] = reach[s & (s - 1)] | adj[static_cast<std::size_t>(std::countr_zero(s))];
    const int size = std::popcount(s);
    if (2 * static_cast<std::size_t>(size) > n) continue;
    const int boundary = std::popcount(reach[s] & ~s & full);
    best = std::min(best, static_cast<double>(boundary) / size);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Text format

void write_graph(std::ostream& out, const Graph& g) {
  const auto lines = g.edge_lines();
  out << "crwgraph v1 " << g.n() << ' ' << lines.size() << '\n';
  for (const EdgeLine& e : lines) out << e.u << ' ' << e.v << ' ' << e.multiplicity << '\n';
}

Graph read_graph(std::istream& in) {
  std::string magic, version;
  std::size_t n = 0, m = 0;
  if (!(in >> magic >> version >> n >> m) || magic != "crwgraph")
    throw Error(ErrorCode::ParseError, "missing 'crwgraph' header");
  if (version != "v1") throw Error(ErrorCode::ParseError, "unsupported graph format version '" + version + "'");
  std::vector<EdgeLine> edges;
  edges.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    long long u = 0, v = 0, mult = 0;
    if (!(in >> u >> v >> mult)) throw Error(ErrorCode::ParseError, "truncated edge list at line " + std::to_string(i + 2));
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n || u >= v || mult <= 0)
      throw Error(ErrorCode::ParseError, "invalid edge line " + std::to_string(i + 2));
    edges.push_back({static_cast<Vertex>(u), static_cast<Vertex>(v), static_cast<std::uint32_t>(mult)});
  }
  return Graph(n, edges);
}

}  // namespace crw
