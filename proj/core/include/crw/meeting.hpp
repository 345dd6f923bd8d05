#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "crw/chain.hpp"

namespace crw {

// Replicate-parallel Monte Carlo settings shared by the estimators. Results
// depend only on (seed, reps), never on `threads`.
struct McOptions {
  std::size_t reps = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct MeetingProfile {
  Eigen::MatrixXd pairwise;      // E_{x,y} tau_meet; zero diagonal
  double t_meet_pi = 0.0;        // E_{pi,pi} tau_meet
  double t_meet_distinct = 0.0;  // E_{pi,pi}[tau_meet | X(0) != Y(0)]
  double max_residual = 0.0;     // max row residual of the hitting-time system
};

inline constexpr std::size_t kMaxProductStates = 250000;

// Solves the hitting-time system of the diagonal in the two-walker product
// chain by preconditioned conjugate gradients on the implicit product
// operator. Throws TooLargeForExact when n^2 > 250000.
MeetingProfile pairwise_meeting_times(const MarkovChain& c);

enum class MeetingMode { PiPi, Distinct };

double mean_meeting_time(const MeetingProfile& profile, MeetingMode mode);
double mean_meeting_time(const MarkovChain& c, MeetingMode mode);

struct MeetingTimeEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t runs = 0;
  // Runs stopped at the event horizon; their elapsed time enters the mean,
  // so the estimate is a lower bound when censored > 0.
  std::size_t censored = 0;
};

// Two independent walkers simulated jump by jump until they meet, with a hard
// horizon of 50 n / r_min jumps.
MeetingTimeEstimate estimate_meeting_time_mc(const MarkovChain& c, MeetingMode mode, const McOptions& mc);

// M r_max / n; reported only, no bound asserted.
double meeting_rmax_diagnostic(const MarkovChain& c);

struct AlphaEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero in exact mode
  double lower95 = 0.0;
  double upper95 = 0.0;
};

// alpha_t(x) = r(x) P_{x, nu_x}(tau_meet > t), via uniformization of the
// product chain killed on the diagonal.
AlphaEstimate alpha_survival_exact(const MarkovChain& c, Vertex x, double t);
AlphaEstimate alpha_survival_mc(const MarkovChain& c, Vertex x, double t, const McOptions& mc);

struct ExitMeasure {
  std::vector<Vertex> subset;
  Eigen::VectorXd weights;  // zero on the subset
  double flow = 0.0;        // Q(A, A^c)
};

// Throws BadSubset for empty, full, out-of-range or repeated entries.
ExitMeasure exit_measure(const MarkovChain& c, std::span<const Vertex> subset);

// |pi(A^c) - Q(A,A^c) E_{nu_A} T_A|.
double kac_residual(const MarkovChain& c, std::span<const Vertex> subset);

// P_pi(T_A > t) for each t, by uniformization with A absorbing.
std::vector<double> hitting_survival(const MarkovChain& c, std::span<const Vertex> subset,
                                     std::span<const double> times, double tol = 1e-14);
// E_pi T_A.
double expected_hitting_time(const MarkovChain& c, std::span<const Vertex> subset);

struct AldousBrownRow {
  double t = 0.0;
  double survival = 0.0;           // P_pi(T_A > t)
  double tail_margin = 0.0;        // t_rel/E - |survival - exp(-t/E)|
  double density = 0.0;            // f_{T_A}(t); NaN at t = 0
  double density_upper_margin = 0.0;
  double density_lower_margin = 0.0;
};

struct AldousBrownReport {
  double expected_hitting = 0.0;  // E_pi T_A
  double t_rel = 0.0;
  std::vector<AldousBrownRow> rows;
  double worst_margin() const;
};

AldousBrownReport aldous_brown_check(const MarkovChain& c, std::span<const Vertex> subset,
                                     std::span<const double> t_grid);

// |sum_{i>=2} 1/lambda_i - 2 t_meet|. Throws NotTransitive.
double eigentime_residual(const MarkovChain& c);

// Chain of two independent walkers on c, state (x, y) -> x * n + y.
// Throws TooLargeForExact when n^2 > 4096.
MarkovChain product_chain(const MarkovChain& c);
std::vector<Vertex> diagonal_states(std::size_t n);

}  // namespace crw
