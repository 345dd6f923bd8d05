#include "crw/meeting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "crw/error.hpp"
#include "crw/parallel.hpp"
#include "crw/stats.hpp"
#include "crw/uniformization.hpp"
#include "crw/walk.hpp"

namespace crw {

namespace {

// out = L f on the two-walker product chain, L = -Q_prod, with f treated as
// zero on the diagonal and the diagonal of `out` forced to zero.
void apply_killed_product(const MarkovChain& c, const Eigen::VectorXd& f, Eigen::VectorXd& out) {
  const std::size_t n = c.n();
  for (std::size_t x = 0; x < n; ++x) {
    const auto row_x = c.transitions(static_cast<Vertex>(x));
    for (std::size_t y = 0; y < n; ++y) {
      const std::size_t s = x * n + y;
      if (x == y) {
        out[static_cast<Eigen::Index>(s)] = 0.0;
        continue;
      }
      double acc = (c.row_rate(static_cast<Vertex>(x)) + c.row_rate(static_cast<Vertex>(y))) * f[static_cast<Eigen::Index>(s)];
      for (const Transition& tr : row_x)
        if (tr.to != y) acc -= tr.rate * f[static_cast<Eigen::Index>(tr.to * n + y)];
      for (const Transition& tr : c.transitions(static_cast<Vertex>(y)))
        if (tr.to != x) acc -= tr.rate * f[static_cast<Eigen::Index>(x * n + tr.to)];
      out[static_cast<Eigen::Index>(s)] = acc;
    }
  }
}

void check_product_size(const MarkovChain& c) {
  if (c.n() * c.n() > kMaxProductStates)
    throw Error(ErrorCode::TooLargeForExact, "product chain limited to 250000 states");
}

std::vector<char> subset_mask(const MarkovChain& c, std::span<const Vertex> subset) {
  const std::size_t n = c.n();
  if (subset.empty()) throw Error(ErrorCode::BadSubset, "subset is empty");
  std::vector<char> mask(n, 0);
  for (Vertex v : subset) {
    if (v >= n) throw Error(ErrorCode::BadSubset, "subset entry out of range");
    if (mask[v]) throw Error(ErrorCode::BadSubset, "subset entry repeated");
    mask[v] = 1;
  }
  if (subset.size() == n) throw Error(ErrorCode::BadSubset, "subset must be a proper subset");
  return mask;
}

// Hitting times of A from every state (zero on A) by a dense solve on A^c.
Eigen::VectorXd hitting_times(const MarkovChain& c, const std::vector<char>& in_a) {
  const std::size_t n = c.n();
  if (n > kMaxDenseStates) throw Error(ErrorCode::TooLargeForExact, "hitting-time solve limited to 4096 states");
  std::vector<Vertex> outside;
  std::vector<Eigen::Index> pos(n, -1);
  for (Vertex x = 0; x < n; ++x)
    if (!in_a[x]) {
      pos[x] = static_cast<Eigen::Index>(outside.size());
      outside.push_back(x);
    }
  const auto m = static_cast<Eigen::Index>(outside.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vertex x = outside[static_cast<std::size_t>(i)];
    lap(i, i) = c.row_rate(x);
    for (const Transition& tr : c.transitions(x))
      if (pos[tr.to] >= 0) lap(i, pos[tr.to]) -= tr.rate;
  }
  const Eigen::VectorXd sol = lap.ldlt().solve(Eigen::VectorXd::Ones(m));
  Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < m; ++i) h[outside[static_cast<std::size_t>(i)]] = sol[i];
  return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// Meeting times

MeetingProfile pairwise_meeting_times(const MarkovChain& c) {
  check_product_size(c);
  const std::size_t n = c.n();
  const auto N = static_cast<Eigen::Index>(n * n);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(N);
  Eigen::VectorXd inv_diag(N);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      const auto s = static_cast<Eigen::Index>(x * n + y);
      if (x == y) {
        b[s] = 0.0;
        inv_diag[s] = 0.0;
      } else {
        inv_diag[s] = 1.0 / (c.row_rate(static_cast<Vertex>(x)) + c.row_rate(static_cast<Vertex>(y)));
      }
    }

  // Jacobi-preconditioned conjugate gradients; the killed product operator is
  // symmetric positive definite on the off-diagonal states.
  Eigen::VectorXd sol = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  Eigen::VectorXd ap(N);
  double rz = r.dot(z);
  const double target = 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff());
  const std::size_t max_iter = 50 * n * n + 1000;
  for (std::size_t it = 0; it < max_iter && r.cwiseAbs().maxCoeff() > target; ++it) {
    apply_killed_product(c, p, ap);
    const double alpha = rz / p.dot(ap);
    sol += alpha * p;
    r -= alpha * ap;
    // Periodically recompute the true residual to stop drift.
    if (it % 200 == 199) {
      apply_killed_product(c, sol, ap);
      r = b - ap;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }

  MeetingProfile out;
  apply_killed_product(c, sol, ap);
  out.max_residual = (b - ap).cwiseAbs().maxCoeff();
  out.pairwise = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if (x != y) {
        // Symmetrize; the exact solution is symmetric in (x, y).
        out.pairwise(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) =
            0.5 * (sol[static_cast<Eigen::Index>(x * n + y)] + sol[static_cast<Eigen::Index>(y * n + x)]);
      }
  out.t_meet_pi = mean_meeting_time(out, MeetingMode::PiPi);
  out.t_meet_distinct = mean_meeting_time(out, MeetingMode::Distinct);
  return out;
}

double mean_meeting_time(const MeetingProfile& profile, MeetingMode mode) {
  const double n = static_cast<double>(profile.pairwise.rows());
  KahanSum total;
  for (Eigen::Index i = 0; i < profile.pairwise.size(); ++i) total.add(profile.pairwise.data()[i]);
  if (mode == MeetingMode::PiPi) return total.value() / (n * n);
  return n > 1 ? total.value() / (n * (n - 1.0)) : 0.0;
}

double mean_meeting_time(const MarkovChain& c, MeetingMode mode) {
  return mean_meeting_time(pairwise_meeting_times(c), mode);
}

MeetingTimeEstimate estimate_meeting_time_mc(const MarkovChain& c, MeetingMode mode, const McOptions& mc) {
  if (mc.reps == 0) throw Error(ErrorCode::EmptyEstimate, "meeting-time estimate needs reps >= 1");
  if (mode == MeetingMode::Distinct && c.n() < 2) throw Error(ErrorCode::ParameterOutOfRange, "distinct start needs n >= 2");
  const WalkKernel kernel(c);
  const auto horizon = static_cast<std::uint64_t>(std::ceil(50.0 * static_cast<double>(c.n()) / c.r_min()));
  const std::uint64_t key = stream_key("meeting_time");
  std::vector<double> times(mc.reps);
  std::vector<char> censored(mc.reps, 0);
  parallel_for(mc.reps, mc.threads, [&](std::size_t i) {
    Rng rng(derive_seed(mc.seed, key, i));
    auto x = static_cast<Vertex>(rng.below(c.n()));
    auto y = static_cast<Vertex>(rng.below(c.n()));
    if (mode == MeetingMode::Distinct)
      while (y == x) y = static_cast<Vertex>(rng.below(c.n()));
    double clock = 0.0;
    std::uint64_t events = 0;
    while (x != y) {
      if (events++ >= horizon) {
        censored[i] = 1;
        break;
      }
      const double rx = c.row_rate(x), ry = c.row_rate(y);
      clock += rng.exponential(rx + ry);
      if (rng.uniform() * (rx + ry) < rx)
        x = kernel.step(x, rng);
      else
        y = kernel.step(y, rng);
    }
    times[i] = clock;
  });
  const Summary s = summarize(times);
  MeetingTimeEstimate out;
  out.mean = s.mean;
  out.std_error = s.std_error;
  out.runs = mc.reps;
  out.censored = static_cast<std::size_t>(std::count(censored.begin(), censored.end(), 1));
  return out;
}

double meeting_rmax_diagnostic(const MarkovChain& c) {
  return mean_meeting_time(c, MeetingMode::PiPi) * c.r_max() / static_cast<double>(c.n());
}

// ---------------------------------------------------------------------------
// alpha_t(x)

AlphaEstimate alpha_survival_exact(const MarkovChain& c, Vertex x, double t) {
  check_product_size(c);
  if (x >= c.n()) throw Error(ErrorCode::ParameterOutOfRange, "vertex out of range");
  if (t < 0.0) throw Error(ErrorCode::ParameterOutOfRange, "time must be nonnegative");
  const std::size_t n = c.n();
  Eigen::VectorXd init = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n * n));
  for (const Transition& tr : c.transitions(x)) init[static_cast<Eigen::Index>(x * n + tr.to)] = tr.rate / c.row_rate(x);
  const double bound = 2.0 * c.r_max();
  Eigen::VectorXd scratch(init.size());
  const Eigen::VectorXd law = uniformize(
      init,
      [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        apply_killed_product(c, in, scratch);
        out = in - scratch / bound;
        for (std::size_t v = 0; v < n; ++v) out[static_cast<Eigen::Index>(v * n + v)] = 0.0;
      },
      bound, t, 1e-13);
  AlphaEstimate a;
  a.value = c.row_rate(x) * std::clamp(law.sum(), 0.0, 1.0);
  a.lower95 = a.upper95 = a.value;
  return a;
}

AlphaEstimate alpha_survival_mc(const MarkovChain& c, Vertex x, double t, const McOptions& mc) {
  if (x >= c.n()) throw Error(ErrorCode::ParameterOutOfRange, "vertex out of range");
  if (mc.reps < 2) throw Error(ErrorCode::EmptyEstimate, "alpha estimate needs reps >= 2");
  const WalkKernel kernel(c);
  const std::uint64_t key = stream_key("alpha_survival");
  std::vector<double> survive(mc.reps);
  parallel_for(mc.reps, mc.threads, [&](std::size_t i) {
    Rng rng(derive_seed(mc.seed, key, i));
    Vertex a = x;
    Vertex b = kernel.step(x, rng);
    double clock = 0.0;
    for (;;) {
      const double ra = c.row_rate(a), rb = c.row_rate(b);
      clock += rng.exponential(ra + rb);
      if (clock > t) {
        survive[i] = 1.0;
        return;
      }
      if (rng.uniform() * (ra + rb) < ra)
        a = kernel.step(a, rng);
      else
        b = kernel.step(b, rng);
      if (a == b) {
        survive[i] = 0.0;
        return;
      }
    }
  });
  const Summary s = summarize(survive);
  AlphaEstimate out;
  out.value = c.row_rate(x) * s.mean;
  out.std_error = c.row_rate(x) * s.std_error;
  out.lower95 = out.value - 1.96 * out.std_error;
  out.upper95 = out.value + 1.96 * out.std_error;
  return out;
}

// ---------------------------------------------------------------------------
// Exit measures, Kac, Aldous-Brown

ExitMeasure exit_measure(const MarkovChain& c, std::span<const Vertex> subset) {
  const auto in_a = subset_mask(c, subset);
  const double pi = 1.0 / static_cast<double>(c.n());
  ExitMeasure out;
  out.subset.assign(subset.begin(), subset.end());
  out.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.n()));
  for (Vertex y : subset)
    for (const Transition& tr : c.transitions(y))
      if (!in_a[tr.to]) out.weights[tr.to] += pi * tr.rate;
  out.flow = out.weights.sum();
  out.weights /= out.flow;
  return out;
}

double expected_hitting_time(const MarkovChain& c, std::span<const Vertex> subset) {
  const auto in_a = subset_mask(c, subset);
  return hitting_times(c, in_a).mean();
}

double kac_residual(const MarkovChain& c, std::span<const Vertex> subset) {
  const auto in_a = subset_mask(c, subset);
  const ExitMeasure nu = exit_measure(c, subset);
  const Eigen::VectorXd h = hitting_times(c, in_a);
  const double pi_out = static_cast<double>(c.n() - subset.size()) / static_cast<double>(c.n());
  return std::abs(pi_out - nu.flow * nu.weights.dot(h));
}

std::vector<double> hitting_survival(const MarkovChain& c, std::span<const Vertex> subset,
                                     std::span<const double> times, double tol) {
  const auto in_a = subset_mask(c, subset);
  const std::size_t n = c.n();
  const double pi = 1.0 / static_cast<double>(n);
  Eigen::VectorXd init(static_cast<Eigen::Index>(n));
  for (Vertex x = 0; x < n; ++x) init[x] = in_a[x] ? 0.0 : pi;
  const double bound = c.r_max();
  Eigen::VectorXd scratch(init.size());
  auto step = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    for (Vertex x = 0; x < n; ++x) {
      if (in_a[x]) {
        out[x] = 0.0;
        continue;
      }
      double acc = in[x] * (1.0 - c.row_rate(x) / bound);
      for (const Transition& tr : c.transitions(x)) acc += in[tr.to] * tr.rate / bound;
      out[x] = acc;
    }
  };
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    if (t < 0.0) throw Error(ErrorCode::ParameterOutOfRange, "time must be nonnegative");
    out.push_back(uniformize(init, step, bound, t, tol).sum());
  }
  return out;
}

double AldousBrownReport::worst_margin() const {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    worst = std::min(worst, row.tail_margin);
    if (!std::isnan(row.density)) worst = std::min({worst, row.density_upper_margin, row.density_lower_margin});
  }
  return worst;
}

AldousBrownReport aldous_brown_check(const MarkovChain& c, std::span<const Vertex> subset,
                                     std::span<const double> t_grid) {
  AldousBrownReport report;
  report.expected_hitting = expected_hitting_time(c, subset);
  report.t_rel = spectrum(c).t_rel;
  const double e = report.expected_hitting;
  for (double t : t_grid) {
    AldousBrownRow row;
    row.t = t;
    const double at[1] = {t};
    row.survival = hitting_survival(c, subset, at)[0];
    row.tail_margin = report.t_rel / e - std::abs(row.survival - std::exp(-t / e));
    if (t > 0.0) {
      const double h = std::min(1e-4, t / 100.0);
      const double around[2] = {t - h, t + h};
      const auto s = hitting_survival(c, subset, around);
      row.density = (s[0] - s[1]) / (2.0 * h);
      row.density_upper_margin = (1.0 / e) * (1.0 + report.t_rel / (2.0 * t)) - row.density;
      row.density_lower_margin = row.density - (1.0 / e) * (1.0 - (2.0 * report.t_rel + t) / e);
    } else {
      row.density = std::numeric_limits<double>::quiet_NaN();
    }
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Eigentime identity, product chain

double eigentime_residual(const MarkovChain& c) {
  if (!c.is_transitive()) throw Error(ErrorCode::NotTransitive, "eigentime identity needs a transitive chain");
  const Spectrum sp = spectrum(c);
  KahanSum sum;
  for (std::size_t i = 1; i < sp.eigenvalues.size(); ++i) sum.add(1.0 / sp.eigenvalues[i]);
  return std::abs(sum.value() - 2.0 * mean_meeting_time(c, MeetingMode::PiPi));
}

MarkovChain product_chain(const MarkovChain& c) {
  const std::size_t n = c.n();
  if (n * n > kMaxDenseStates) throw Error(ErrorCode::TooLargeForExact, "materialized product chain limited to 4096 states");
  const auto N = static_cast<Eigen::Index>(n * n);
  Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      const auto s = static_cast<Eigen::Index>(x * n + y);
      for (const Transition& tr : c.transitions(static_cast<Vertex>(x)))
        rates(s, static_cast<Eigen::Index>(tr.to * n + y)) = tr.rate;
      for (const Transition& tr : c.transitions(static_cast<Vertex>(y)))
        rates(s, static_cast<Eigen::Index>(x * n + tr.to)) = tr.rate;
    }
  return MarkovChain::from_dense(rates);
}

std::vector<Vertex> diagonal_states(std::size_t n) {
  std::vector<Vertex> out(n);
  for (std::size_t x = 0; x < n; ++x) out[x] = static_cast<Vertex>(x * n + x);
  return out;
}

}  // namespace crw
