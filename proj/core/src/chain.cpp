#include "crw/chain.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "crw/error.hpp"
#include "crw/uniformization.hpp"

namespace crw {

namespace {

constexpr double kZeroEigenvalue = 1e-10;

Eigen::SparseMatrix<double, Eigen::RowMajor> jump_kernel(const MarkovChain& c, double bound) {
  std::vector<Eigen::Triplet<double>> entries;
  const auto n = static_cast<Vertex>(c.n());
  for (Vertex x = 0; x < n; ++x) {
    entries.emplace_back(x, x, 1.0 - c.row_rate(x) / bound);
    for (const Transition& tr : c.transitions(x)) entries.emplace_back(x, tr.to, tr.rate / bound);
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> k(n, n);
  k.setFromTriplets(entries.begin(), entries.end());
  return k;
}

bool reachable_all(const MarkovChain& c) {
  const std::size_t n = c.n();
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::vector<Vertex> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    for (const Transition& tr : c.transitions(v))
      if (!seen[tr.to]) {
        seen[tr.to] = 1;
        ++count;
        stack.push_back(tr.to);
      }
  }
  return count == n;
}

// Evaluates the diagonal of p_s through the eigen-decomposition
// p_s(x,x) = sum_i exp(-lambda_i s) u_i(x)^2.
class ReturnEvaluator {
 public:
  explicit ReturnEvaluator(const MarkovChain& c) : n_(c.n()) {
    if (c.family()) {
      transitive_ = true;
      const Spectrum sp = spectrum(c);
      lambdas_ = Eigen::Map<const Eigen::VectorXd>(sp.eigenvalues.data(), static_cast<Eigen::Index>(sp.eigenvalues.size()));
      return;
    }
    if (c.n() > kMaxDenseStates) throw Error(ErrorCode::TooLargeForExact, "dense eigen-decomposition limited to 4096 states");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(-c.generator());
    lambdas_ = solver.eigenvalues();
    for (Eigen::Index i = 0; i < lambdas_.size(); ++i)
      if (std::abs(lambdas_[i]) < kZeroEigenvalue) lambdas_[i] = 0.0;
    weights_ = solver.eigenvectors().cwiseAbs2();
  }

  Eigen::VectorXd diag(double s) const {
    const Eigen::VectorXd decay = (-s * lambdas_).array().exp();
    if (transitive_) return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_), decay.sum() / static_cast<double>(n_));
    return weights_ * decay;
  }

  // Exact int_0^s p_u(x,x) du.
  Eigen::VectorXd integral(double s) const {
    Eigen::VectorXd g(lambdas_.size());
    for (Eigen::Index i = 0; i < lambdas_.size(); ++i)
      g[i] = lambdas_[i] == 0.0 ? s : -std::expm1(-lambdas_[i] * s) / lambdas_[i];
    if (transitive_) return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_), g.sum() / static_cast<double>(n_));
    return weights_ * g;
  }

 private:
  std::size_t n_;
  bool transitive_ = false;
  Eigen::VectorXd lambdas_;
  Eigen::MatrixXd weights_;
};

}  // namespace

// ---------------------------------------------------------------------------
// MarkovChain

void MarkovChain::finalize() {
  const std::size_t n = row_rate_.size();
  r_max_ = 0.0;
  r_min_ = n ? row_rate_[0] : 0.0;
  for (double r : row_rate_) {
    r_max_ = std::max(r_max_, r);
    r_min_ = std::min(r_min_, r);
  }
}

MarkovChain MarkovChain::from_dense(const Eigen::MatrixXd& rates) {
  if (rates.rows() != rates.cols()) throw Error(ErrorCode::ParameterOutOfRange, "rate matrix must be square");
  const auto n = static_cast<std::size_t>(rates.rows());
  MarkovChain c;
  c.offsets_.assign(n + 1, 0);
  c.row_rate_.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const double r = rates(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
      if (x == y) {
        if (r != 0.0) throw Error(ErrorCode::ParameterOutOfRange, "rate matrix must have zero diagonal");
        continue;
      }
      if (r < 0.0 || !std::isfinite(r)) throw Error(ErrorCode::ParameterOutOfRange, "rates must be finite and nonnegative");
      if (r != rates(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)))
        throw Error(ErrorCode::ParameterOutOfRange, "rates must be symmetric");
      if (r > 0.0) {
        c.transitions_.push_back({static_cast<Vertex>(y), r});
        c.row_rate_[x] += r;
      }
    }
    c.offsets_[x + 1] = c.transitions_.size();
  }
  if (!reachable_all(c)) throw Error(ErrorCode::NotConnected, "rate graph is not irreducible");
  c.finalize();
  return c;
}

double MarkovChain::rate(Vertex x, Vertex y) const {
  const auto row = transitions(x);
  const auto it = std::lower_bound(row.begin(), row.end(), y, [](const Transition& t, Vertex v) { return t.to < v; });
  return it != row.end() && it->to == y ? it->rate : 0.0;
}

Eigen::MatrixXd MarkovChain::dense_rates() const {
  if (n() > kMaxDenseStates) throw Error(ErrorCode::TooLargeForExact, "dense rate matrix limited to 4096 states");
  const auto n_ = static_cast<Eigen::Index>(n());
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n_, n_);
  for (Vertex x = 0; x < n(); ++x)
    for (const Transition& tr : transitions(x)) r(x, tr.to) = tr.rate;
  return r;
}

Eigen::MatrixXd MarkovChain::generator() const {
  Eigen::MatrixXd q = dense_rates();
  for (Vertex x = 0; x < n(); ++x) q(x, x) = -row_rate_[x];
  return q;
}

MarkovChain build_generator(const Graph& g, RateConvention convention) {
  if (!is_connected(g)) throw Error(ErrorCode::NotConnected, "graph is not connected");
  if (convention == RateConvention::TotalUnit && !g.is_regular())
    throw Error(ErrorCode::TotalUnitOnIrregular, "total-unit rates need a regular graph");
  MarkovChain c;
  const std::size_t n = g.n();
  const double scale = convention == RateConvention::TotalUnit && g.d_max() > 0 ? 1.0 / static_cast<double>(g.d_max()) : 1.0;
  c.offsets_.assign(n + 1, 0);
  c.row_rate_.assign(n, 0.0);
  for (Vertex x = 0; x < n; ++x) {
    for (const Neighbor& nb : g.neighbors(x)) {
      const double r = nb.multiplicity * scale;
      c.transitions_.push_back({nb.vertex, r});
      c.row_rate_[x] += r;
    }
    c.offsets_[x + 1] = c.transitions_.size();
  }
  if (convention == RateConvention::TotalUnit)
    for (double& r : c.row_rate_) r = 1.0;
  c.convention_ = convention;
  c.family_ = g.family();
  c.transitive_ = g.is_transitive();
  c.rate_scale_ = scale;
  c.finalize();
  return c;
}

// ---------------------------------------------------------------------------
// Transition probabilities

Eigen::MatrixXd transition_matrix(const MarkovChain& c, double t, double tol) {
  if (c.n() > kMaxDenseStates) throw Error(ErrorCode::TooLargeForExact, "transition_matrix limited to 4096 states");
  if (t < 0.0) throw Error(ErrorCode::ParameterOutOfRange, "time must be nonnegative");
  const auto n = static_cast<Eigen::Index>(c.n());
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  if (t == 0.0 || c.r_max() == 0.0) return identity;
  const auto kernel = jump_kernel(c, c.r_max());
  return uniformize(identity, [&](const Eigen::MatrixXd& in, Eigen::MatrixXd& out) { out.noalias() = kernel * in; },
                    c.r_max(), t, tol);
}

Eigen::VectorXd return_probabilities(const MarkovChain& c, double t) { return ReturnEvaluator(c).diag(t); }

// ---------------------------------------------------------------------------
// Spectrum

std::vector<double> family_eigenvalues(const Family& f) {
  std::vector<double> out;
  switch (f.kind) {
    case FamilyKind::Complete:
      out.assign(static_cast<std::size_t>(f.side), static_cast<double>(f.side));
      out[0] = 0.0;
      break;
    case FamilyKind::Hypercube: {
      const std::size_t n = std::size_t{1} << f.dimension;
      out.reserve(n);
      for (std::size_t v = 0; v < n; ++v) out.push_back(2.0 * std::popcount(v));
      break;
    }
    case FamilyKind::Cycle:
    case FamilyKind::Torus: {
      const int side = f.side;
      std::vector<double> one(static_cast<std::size_t>(side));
      for (int k = 0; k < side; ++k) one[static_cast<std::size_t>(k)] = 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * k / side);
      out.assign(1, 0.0);
      for (int j = 0; j < f.dimension; ++j) {
        std::vector<double> next;
        next.reserve(out.size() * one.size());
        for (double a : out)
          for (double b : one) next.push_back(a + b);
        out = std::move(next);
      }
      break;
    }
  }
  std::sort(out.begin(), out.end());
  for (double& v : out)
    if (std::abs(v) < kZeroEigenvalue) v = 0.0;
  return out;
}

namespace {

Spectrum finish_spectrum(std::vector<double> eig) {
  std::sort(eig.begin(), eig.end());
  for (double& v : eig)
    if (std::abs(v) < kZeroEigenvalue) v = 0.0;
  Spectrum s;
  if (eig.size() >= 2 && eig[1] == 0.0) throw Error(ErrorCode::NotConnected, "second eigenvalue vanishes");
  s.t_rel = eig.size() >= 2 ? 1.0 / eig[1] : 0.0;
  s.eigenvalues = std::move(eig);
  return s;
}

}  // namespace

Spectrum spectrum_dense(const MarkovChain& c) {
  if (c.n() > kMaxDenseStates) throw Error(ErrorCode::TooLargeForExact, "dense spectrum limited to 4096 states");
  const Eigen::MatrixXd laplacian = -c.generator();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return finish_spectrum(std::vector<double>(ev.data(), ev.data() + ev.size()));
}

Spectrum spectrum(const MarkovChain& c, std::optional<Family> hint) {
  if (!hint) hint = c.family();
  if (!hint) return spectrum_dense(c);
  std::vector<double> eig = family_eigenvalues(*hint);
  if (eig.size() != c.n()) throw Error(ErrorCode::ParameterOutOfRange, "family hint does not match the chain size");
  for (double& v : eig) v *= c.rate_scale();
  return finish_spectrum(std::move(eig));
}

// ---------------------------------------------------------------------------
// Return integrals

ReturnProfile return_integrals(const MarkovChain& c, double t, int quad_steps) {
  if (t < 0.0) throw Error(ErrorCode::ParameterOutOfRange, "time must be nonnegative");
  ReturnProfile profile;
  profile.t = t;
  if (t == 0.0) return profile;
  const ReturnEvaluator eval(c);

  auto simpson = [&](std::size_t steps) {
    const double h = t / static_cast<double>(steps);
    Eigen::VectorXd acc = eval.diag(0.0) + eval.diag(t);
    for (std::size_t i = 1; i < steps; ++i) acc += (i % 2 ? 4.0 : 2.0) * eval.diag(h * static_cast<double>(i));
    return Eigen::VectorXd(acc * (h / 3.0));
  };
  std::size_t steps = static_cast<std::size_t>(std::max(2, quad_steps + (quad_steps % 2)));
  Eigen::VectorXd current = simpson(steps);
  for (int refinement = 0; refinement < 16; ++refinement) {
    steps *= 2;
    Eigen::VectorXd refined = simpson(steps);
    const double change = (refined - current).cwiseAbs().maxCoeff();
    current = std::move(refined);
    if (change < 1e-9) break;
  }
  profile.M_t = current.maxCoeff();
  profile.m_t = current.minCoeff();

  if (c.family()) return profile;  // transitive: H = 1
  const double t_rel = spectrum_dense(c).t_rel;
  const double lo = t_rel / 2.0, hi = 2.0 * t;
  if (lo < hi) {
    constexpr int kGrid = 64;
    for (int j = 1; j < kGrid; ++j) {
      const double s = lo * std::pow(hi / lo, static_cast<double>(j) / kGrid);
      const Eigen::VectorXd integral = eval.integral(s);
      profile.H_t = std::max(profile.H_t, integral.maxCoeff() / integral.minCoeff());
    }
  }
  return profile;
}

double poincare_excess(const MarkovChain& c, double s, double t) {
  const double inv_n = 1.0 / static_cast<double>(c.n());
  const double t_rel = spectrum(c).t_rel;
  const Eigen::MatrixXd later = transition_matrix(c, t + s);
  const Eigen::MatrixXd earlier = transition_matrix(c, s);
  const double lhs = later.maxCoeff() - inv_n;
  const double rhs = std::exp(-t / t_rel) * (earlier.diagonal().maxCoeff() - inv_n);
  return lhs - rhs;
}

double cheeger_margin(const Graph& g) {
  const double kappa = vertex_expansion_exact(g);
  const MarkovChain c = build_generator(g, RateConvention::PerEdgeUnit);
  const double gap = 1.0 / spectrum(c).t_rel;
  return gap - kappa * kappa / (2.0 * static_cast<double>(g.d_max()));
}

}  // namespace crw
