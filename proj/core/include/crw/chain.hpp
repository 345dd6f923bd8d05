#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "crw/graph.hpp"

namespace crw {

enum class RateConvention {
  PerEdgeUnit,  // r_{x,y} = edge multiplicity
  TotalUnit,    // r(x) = 1 for every x; regular graphs only
};

struct Transition {
  Vertex to;
  double rate;
};

// Continuous-time chain with symmetric rates r_{x,y}, stored sparsely. The
// stationary law is uniform. A dense rate matrix is produced on demand for
// the exact routines.
class MarkovChain {
 public:
  MarkovChain() = default;

  // Validates symmetry, zero diagonal, nonnegativity and irreducibility.
  static MarkovChain from_dense(const Eigen::MatrixXd& rates);

  std::size_t n() const { return row_rate_.size(); }
  std::span<const Transition> transitions(Vertex x) const {
    return {transitions_.data() + offsets_[x], transitions_.data() + offsets_[x + 1]};
  }
  double rate(Vertex x, Vertex y) const;
  double row_rate(Vertex x) const { return row_rate_[x]; }
  double r_max() const { return r_max_; }
  double r_min() const { return r_min_; }
  RateConvention convention() const { return convention_; }

  // Set for chains built from a transitive family; closed-form eigenvalues of
  // the family are scaled by rate_scale().
  const std::optional<Family>& family() const { return family_; }
  double rate_scale() const { return rate_scale_; }
  bool is_transitive() const { return transitive_; }
  // Caller assertion for chains without a family tag.
  void assert_transitive() { transitive_ = true; }

  // Throws TooLargeForExact above 4096 states.
  Eigen::MatrixXd dense_rates() const;
  // Q with Q(x,y) = r_{x,y}, Q(x,x) = -r(x).
  Eigen::MatrixXd generator() const;

 private:
  friend MarkovChain build_generator(const Graph& g, RateConvention convention);
  void finalize();

  std::vector<std::size_t> offsets_;
  std::vector<Transition> transitions_;
  std::vector<double> row_rate_;
  double r_max_ = 0.0;
  double r_min_ = 0.0;
  RateConvention convention_ = RateConvention::PerEdgeUnit;
  std::optional<Family> family_;
  double rate_scale_ = 1.0;
  bool transitive_ = false;
};

// Throws NotConnected, TotalUnitOnIrregular.
MarkovChain build_generator(const Graph& g, RateConvention convention = RateConvention::PerEdgeUnit);

inline constexpr std::size_t kMaxDenseStates = 4096;

// p_t = exp(tQ) by uniformization; truncation mass below tol.
Eigen::MatrixXd transition_matrix(const MarkovChain& c, double t, double tol = 1e-12);

// Diagonal of p_t only, from the spectral decomposition (dense path) or the
// trace formula (transitive families).
Eigen::VectorXd return_probabilities(const MarkovChain& c, double t);

struct Spectrum {
  std::vector<double> eigenvalues;  // of -Q, ascending, eigenvalues[0] == 0
  double t_rel = 0.0;
};

// Closed form when a family is available (hint, else the chain's own tag),
// otherwise dense symmetric eigen-decomposition.
Spectrum spectrum(const MarkovChain& c, std::optional<Family> hint = std::nullopt);
Spectrum spectrum_dense(const MarkovChain& c);
// Eigenvalues of -Q for a family under unit per-edge rates.
std::vector<double> family_eigenvalues(const Family& f);

struct ReturnProfile {
  double t = 0.0;
  double M_t = 0.0;  // sup_x int_0^t p_s(x,x) ds
  double m_t = 0.0;  // inf_x int_0^t p_s(x,x) ds
  double H_t = 1.0;  // sup over (t_rel/2, 2t) of M_s / m_s
};

ReturnProfile return_integrals(const MarkovChain& c, double t, int quad_steps = 512);

// max_x,y p_{t+s}(x,y) - 1/n minus its Poincare upper bound; <= 0 when the
// contraction holds.
double poincare_excess(const MarkovChain& c, double s, double t);

// lambda_2 - kappa^2 / (2 d_max) for the unit-rate walk on g; >= 0 when the
// Cheeger bound holds. Requires g.n() <= 20.
double cheeger_margin(const Graph& g);

}  // namespace crw
