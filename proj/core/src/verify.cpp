#include "crw/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "crw/crw_sim.hpp"
#include "crw/csv.hpp"
#include "crw/error.hpp"
#include "crw/meeting.hpp"
#include "crw/theory.hpp"
#include "crw/voter.hpp"

namespace crw {

bool CriterionResult::passed() const {
  if (checks.empty()) return false;
  for (const Check& c : checks)
    if (!c.pass) return false;
  return true;
}

bool SuiteReport::passed() const {
  for (const auto& c : criteria)
    if (!c.passed()) return false;
  return !criteria.empty();
}

std::string SuiteReport::data_csv() const {
  std::ostringstream out;
  CsvWriter csv(out);
  csv.row({"criterion", "quantity", "value"});
  for (const auto& c : criteria)
    for (const auto& m : c.data) csv.row({std::to_string(c.id), m.quantity, format_real(m.value)});
  return out.str();
}

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

class Recorder {
 public:
  Recorder(CriterionResult& r, const VerifyOptions& o) : r_(r), o_(o) {}

  double scale() const { return o_.tolerance_scale; }
  McOptions mc(std::size_t reps, std::string_view stream) const {
    return {reps, derive_seed(o_.seed, stream_key(stream), static_cast<std::uint64_t>(r_.id)), o_.threads};
  }

  void measure(const std::string& q, double v) { r_.data.push_back({q, v}); }
  void check(const std::string& name, bool pass, const std::string& detail) { r_.checks.push_back({name, pass, detail}); }

  // value <= tol * scale
  void at_most(const std::string& name, double value, double tol) {
    measure(name, value);
    check(name, value <= tol * scale(), fmt("%.3g <= %.3g", value, tol * scale()));
  }
  // value >= -tol * scale
  void at_least(const std::string& name, double value, double tol) {
    measure(name, value);
    check(name, value >= -tol * scale(), fmt("%.3g >= %.3g", value, -tol * scale()));
  }
  // |estimate - target| <= sigmas * se * scale
  void sigma(const std::string& name, double estimate, double target, double se, double sigmas) {
    measure(name, estimate);
    const double dev = std::abs(estimate - target);
    const bool ok = se > 0.0 ? dev <= sigmas * se * scale() : dev <= 1e-12 * scale();
    check(name, ok, fmt("|%.6g - %.6g| vs %.3g", estimate, target, sigmas * se * scale()));
  }
  // value in [lo, hi] with the half-width scaled about the midpoint
  void window(const std::string& name, double value, double lo, double hi) {
    measure(name, value);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo) * scale();
    check(name, std::abs(value - mid) <= half, fmt("%.6g in [%.4g, %.4g]", value, mid - half, mid + half));
  }
  void row(const std::string& line) { r_.table.push_back(line); }

 private:
  CriterionResult& r_;
  const VerifyOptions& o_;
};

std::vector<double> linspace_grid(double step, double last) {
  std::vector<double> out;
  for (int i = 1; i * step <= last + 1e-12; ++i) out.push_back(i * step);
  return out;
}

MarkovChain chain_of(const Graph& g, RateConvention rc = RateConvention::PerEdgeUnit) { return build_generator(g, rc); }

double eigentime_t_meet(const MarkovChain& c) {
  const Spectrum sp = spectrum(c);
  KahanSum s;
  for (std::size_t i = 1; i < sp.eigenvalues.size(); ++i) s.add(1.0 / sp.eigenvalues[i]);
  return s.value() / 2.0;
}

double mean_density_exact(const MarkovChain& c, double t) {
  const auto p = exact_occupancy_density(c, t);
  KahanSum s;
  for (double v : p) s.add(v);
  return s.value() / static_cast<double>(p.size());
}

// ---------------------------------------------------------------------------

void criterion_exact_identities(Recorder& rec, const VerifyOptions& opts) {
  // Kac on random reversible chains with random subsets.
  double worst_kac = 0.0;
  for (int i = 0; i < 20; ++i) {
    Rng rng(derive_seed(opts.seed, stream_key("kac_chains"), static_cast<std::uint64_t>(i)));
    const auto n = static_cast<Eigen::Index>(3 + rng.below(6));
    Eigen::MatrixXd rates = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index x = 1; x < n; ++x) {
      const auto y = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(x)));
      rates(x, y) = rates(y, x) = rng.uniform(0.2, 2.0);
    }
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = x + 1; y < n; ++y)
        if (rates(x, y) == 0.0 && rng.bernoulli(0.4)) rates(x, y) = rates(y, x) = rng.uniform(0.1, 2.0);
    const MarkovChain c = MarkovChain::from_dense(rates);
    std::vector<Vertex> subset;
    while (subset.empty() || subset.size() == static_cast<std::size_t>(n)) {
      subset.clear();
      for (Vertex v = 0; v < n; ++v)
        if (rng.bernoulli(0.4)) subset.push_back(v);
    }
    worst_kac = std::max(worst_kac, kac_residual(c, subset));
  }
  rec.at_most("kac_residual_max", worst_kac, 1e-9);

  const std::pair<const char*, Graph> eigentime_graphs[] = {
      {"K2", make_path(2)}, {"cycle4", make_cycle(4)}, {"complete4", make_complete(4)}, {"torus3_3", make_torus(3, 3)}};
  for (const auto& [name, g] : eigentime_graphs)
    rec.at_most(std::string("eigentime_residual_") + name, eigentime_residual(chain_of(g)), 1e-8);

  const MarkovChain cycle4 = chain_of(make_cycle(4));
  const MarkovChain pair4 = product_chain(cycle4);
  const auto diag = diagonal_states(4);
  const auto grid = linspace_grid(0.1, 2.0);
  rec.at_least("aldous_brown_worst_margin", aldous_brown_check(pair4, diag, grid).worst_margin(), 1e-6);

  const std::pair<const char*, Graph> builtins[] = {
      {"K2", make_path(2)},           {"path3", make_path(3)},           {"cycle3", make_cycle(3)},
      {"cycle4", make_cycle(4)},      {"cycle5", make_cycle(5)},         {"cycle6", make_cycle(6)},
      {"complete4", make_complete(4)}, {"complete5", make_complete(5)},   {"hypercube3", make_hypercube(3)},
      {"hypercube4", make_hypercube(4)}, {"torus2_4", make_torus(2, 4)}, {"torus3_3", make_torus(3, 3)}};
  double worst_poincare = -INFINITY, worst_cheeger = INFINITY;
  for (const auto& [name, g] : builtins) {
    const MarkovChain c = chain_of(g);
    for (double s : {0.0, 0.25, 1.0})
      for (double t : {0.1, 0.5, 1.0, 2.0}) worst_poincare = std::max(worst_poincare, poincare_excess(c, s, t));
    if (g.n() <= 20) worst_cheeger = std::min(worst_cheeger, cheeger_margin(g));
  }
  rec.at_most("poincare_worst_excess", worst_poincare, 1e-10);
  rec.at_least("cheeger_worst_margin", worst_cheeger, 1e-10);

  rec.at_most("t_rel_cycle4_error", std::abs(spectrum(cycle4).t_rel - 0.5), 1e-8);
  rec.at_most("t_meet_cycle4_error", std::abs(mean_meeting_time(cycle4, MeetingMode::PiPi) - 0.625), 1e-8);
}

void criterion_occupancy(Recorder& rec) {
  const std::vector<double> grid{0.5, 1.0, 2.0};
  const std::pair<const char*, Graph> graphs[] = {{"path2", make_path(2)}, {"cycle4", make_cycle(4)}};
  for (const auto& [name, g] : graphs) {
    const MarkovChain c = chain_of(g);
    const DensityEstimate est = estimate_density(c, grid, rec.mc(100000, std::string("occupancy_") + name));
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const std::string tag = std::string(name) + "_t" + format_real(grid[j]);
      rec.sigma("density_" + tag, est.p_hat[j], mean_density_exact(c, grid[j]), est.std_error[j], 4.0);
      const auto exact = exact_occupancy_density(c, grid[j]);
      double margin = INFINITY;
      for (double v : exact) margin = std::min(margin, v - 1.0 / (1.0 + static_cast<double>(g.d_max()) * grid[j]));
      rec.at_least("benjamini_margin_" + tag, margin, 0.0);
    }
    rec.measure(std::string("variance_bound_ok_") + name, est.variance_bound_ok ? 1.0 : 0.0);
  }
}

void criterion_duality(Recorder& rec) {
  const MarkovChain c = chain_of(make_cycle(6));
  const DualityReport r = duality_gap(c, 1.0, rec.mc(20000, "duality"));
  rec.at_most("ks_nhat_vs_Nt", r.ks_nhat_vs_Nt, 0.02);
  rec.sigma("density_minus_inverse_N", r.density_vs_inverse_N.gap, 0.0, r.density_vs_inverse_N.std_error, 4.0);
  for (std::size_t k = 0; k < r.size_bias.size(); ++k)
    rec.sigma("size_bias_gap_k" + std::to_string(k + 1), r.size_bias[k].gap, 0.0, r.size_bias[k].std_error, 4.0);
  rec.sigma("survival_minus_density", r.survival_vs_density.gap, 0.0, r.survival_vs_density.std_error, 4.0);
  for (std::size_t m = 0; m < r.tail_identity.size(); ++m)
    rec.sigma("tail_identity_gap_M" + std::to_string(m + 2), r.tail_identity[m].gap, 0.0, r.tail_identity[m].std_error, 4.0);
}

void criterion_kingman(Recorder& rec) {
  const MarkovChain c = chain_of(make_complete(8));
  const std::vector<double> tau = sample_tau_coal(c, rec.mc(100000, "tau_coal"));
  const Summary s = summarize(tau);
  rec.sigma("mean_tau_coal", s.mean, 0.875, s.std_error, 4.0);
  const double M = mean_meeting_time(c, MeetingMode::Distinct);
  rec.at_most("t_meet_distinct_error", std::abs(M - 0.5), 1e-9);
  const KingmanSamples k = kingman_tau_coal(8, M, rec.mc(100000, "kingman"));
  rec.at_most("ks_tau_coal_vs_kingman", ks_two_sample(tau, k.samples), 0.02);
}

void criterion_bramson_griffeath(Recorder& rec) {
  const double t = 200.0;
  const MarkovChain c = chain_of(make_cycle(100000), RateConvention::TotalUnit);
  const double grid[1] = {t};
  const DensityEstimate est = estimate_density(c, grid, rec.mc(10, "bg_cycle"));
  const double scaled = std::sqrt(std::numbers::pi * t) * est.p_hat[0];
  rec.measure("P_hat", est.p_hat[0]);
  rec.measure("P_hat_stderr", est.std_error[0]);
  rec.window("sqrt_pi_t_P", scaled, 0.90, 1.10);
  // r(x) = 1, so the lattice prediction applies at time t unchanged.
  const double bg = bg_prediction(1, t);
  const MeanField mf = mean_field_predictions(1e5, t, eigentime_t_meet(c),
                                              alpha_survival_mc(c, 0, t, rec.mc(10000, "bg_alpha")).value);
  rec.row(fmt("cycle(1e5)      t=%-5g  t*P=%.5g", t, t * est.p_hat[0]) + fmt("  A1=%.5g  A2=%.5g", t * mf.A1, t * mf.A2) +
          fmt("  BG(1)=%.5g", t * bg));
}

void criterion_torus_window(Recorder& rec) {
  const double t = 15.0;
  const MarkovChain c = chain_of(make_torus(3, 10));
  const double n = static_cast<double>(c.n());
  const double t_meet = eigentime_t_meet(c);
  const double grid[1] = {t};
  const DensityEstimate est = estimate_density(c, grid, rec.mc(400, "torus_density"));
  rec.measure("t_meet_eigentime", t_meet);
  rec.measure("P_hat", est.p_hat[0]);
  rec.measure("P_hat_stderr", est.std_error[0]);
  const double ratio = n * t * est.p_hat[0] / (2.0 * t_meet);
  rec.window("A2_ratio", ratio, 0.80, 1.20);

  // The Monte Carlo alpha estimator behind A1 is checked against the exact
  // product-chain value on torus(3,6), then used on torus(3,10).
  const MarkovChain small = chain_of(make_torus(3, 6));
  const AlphaEstimate exact6 = alpha_survival_exact(small, 0, t);
  const AlphaEstimate mc6 = alpha_survival_mc(small, 0, t, rec.mc(20000, "torus6_alpha"));
  rec.measure("alpha_exact_torus6", exact6.value);
  rec.sigma("alpha_mc_torus6", mc6.value, exact6.value, mc6.std_error, 4.0);
  const AlphaEstimate alpha = alpha_survival_mc(c, 0, t, rec.mc(20000, "torus10_alpha"));
  rec.measure("alpha_mc_torus10", alpha.value);
  rec.window("A1_ratio", t * est.p_hat[0] * alpha.value, 0.80, 1.20);

  const double psi = estimate_psi_d(3, 20000, rec.mc(20000, "psi3")).psi_hat;
  rec.measure("psi3_hat", psi);
  const MeanField mf = mean_field_predictions(n, t, t_meet, alpha.value);
  // Walkers jump at rate 6; the lattice prediction is stated for rate 1.
  const double bg = bg_prediction(3, 6.0 * t, psi);
  rec.row(fmt("torus(3,10)     t=%-5g  t*P=%.5g", t, t * est.p_hat[0]) + fmt("  A1=%.5g  A2=%.5g", t * mf.A1, t * mf.A2) +
          fmt("  BG(3)=%.5g", t * bg));
}

void criterion_gamma(Recorder& rec) {
  const MarkovChain c = chain_of(make_torus(3, 10));
  const std::vector<double> nhat = sample_voter_nhat(c, 15.0, rec.mc(20000, "voter_gamma"));
  const auto m = normalized_moments(nhat, 3, rec.mc(1, "bootstrap").seed);
  rec.window("m2", m[1].value, 1.4, 1.6);
  rec.window("m3", m[2].value, 2.5, 3.5);
  rec.at_most("gamma_ks", gamma_ks(nhat), 0.05);
}

void criterion_configuration_model(Recorder& rec, const VerifyOptions& opts) {
  const double t = 50.0;
  const std::size_t n = 20000;
  const DegreeDistribution d = DegreeDistribution::point(3);
  Rng graph_rng(derive_seed(opts.seed, stream_key("cm_graph"), 0));
  ConfigurationModelOptions cm;
  cm.require_connected = true;
  const Graph g = sample_configuration_model(d, n, graph_rng, cm);
  const MarkovChain c = chain_of(g);
  const double grid[1] = {t};
  const DensityEstimate est = estimate_density(c, grid, rec.mc(20, "cm_density"));
  const AlphaDEstimate alpha = estimate_alpha_D(d, 30, 200.0, rec.mc(10000, "alpha_D"));
  const MeetingTimeEstimate meet = estimate_meeting_time_mc(c, MeetingMode::PiPi, rec.mc(1000, "cm_meeting"));
  rec.measure("P_hat", est.p_hat[0]);
  rec.measure("alpha_D_hat", alpha.alpha_hat);
  rec.measure("alpha_D_censored_fraction", alpha.censored_fraction);
  rec.measure("t_meet_hat", meet.mean);
  rec.measure("t_meet_censored", static_cast<double>(meet.censored));
  rec.window("t_P_alpha", t * est.p_hat[0] * alpha.alpha_hat, 0.80, 1.20);
  rec.window("two_t_meet_alpha_over_n", 2.0 * meet.mean * alpha.alpha_hat / static_cast<double>(n), 0.85, 1.15);
  const MeanField mf = mean_field_predictions(static_cast<double>(n), t, meet.mean, alpha.alpha_hat);
  rec.row(fmt("CM(delta3,2e4)  t=%-5g  t*P=%.5g", t, t * est.p_hat[0]) + fmt("  A1=%.5g  A2=%.5g", t * mf.A1, t * mf.A2));
}

void criterion_reversal(Recorder& rec) {
  const std::tuple<const char*, Graph, int> cases[] = {
      {"K2_k1", make_path(2), 1}, {"cycle3_k1", make_cycle(3), 1}, {"cycle3_k2", make_cycle(3), 2}};
  for (const auto& [name, g, k] : cases) {
    const MarkovChain c = chain_of(g);
    for (double t : {0.5, 1.0}) {
      const std::string tag = std::string(name) + "_t" + format_real(t);
      const ReversalResidual r = reversal_identity_residual(c, k, t, rec.mc(100000, "reversal_" + tag));
      rec.measure("lhs_" + tag, r.lhs);
      rec.measure("rhs_" + tag, r.rhs);
      rec.at_most("residual_" + tag, r.residual, 3.0);
    }
  }
}

void criterion_arratia(Recorder& rec) {
  const MarkovChain c6 = chain_of(make_cycle(6));
  for (double t : {0.5, 1.0}) {
    for (int dist : {1, 2}) {
      for (Vertex x = 0; x < 6; ++x) {
        const Vertex y = static_cast<Vertex>((x + dist) % 6);
        const std::string tag = "cycle6_" + std::to_string(x) + "_" + std::to_string(y) + "_t" + format_real(t);
        const CovarianceEstimate cov = pair_covariance(c6, x, y, t, rec.mc(100000, "arratia_" + tag));
        rec.measure("cov_" + tag, cov.covariance);
        const double bound = 3.0 * cov.std_error * rec.scale();
        rec.check("cov_" + tag, cov.covariance <= bound, fmt("%.3g <= %.3g", cov.covariance, bound));
      }
    }
  }
  const MarkovChain c4 = chain_of(make_cycle(4));
  double worst = -INFINITY;
  for (double t : {0.5, 1.0, 2.0})
    for (Vertex x = 0; x < 4; ++x)
      for (Vertex y = x + 1; y < 4; ++y) worst = std::max(worst, exact_pair_covariance(c4, x, y, t));
  rec.at_most("exact_cov_cycle4_max", worst, 0.0);
}

void criterion_determinism(Recorder& rec, const VerifyOptions& opts) {
  VerifyOptions one = opts, eight = opts;
  one.threads = 1;
  eight.threads = 8;
  const std::string a = run_suite("statistical", one).data_csv();
  const std::string b = run_suite("statistical", eight).data_csv();
  rec.measure("data_bytes", static_cast<double>(a.size()));
  rec.check("statistical_data_identical_1_vs_8_workers", a == b,
            a == b ? "identical" : "data rows differ between worker counts");
}

const char* title_of(int id) {
  switch (id) {
    case 1: return "exact identity suite";
    case 2: return "MC vs exact occupancy";
    case 3: return "CRW / voter duality";
    case 4: return "Kingman comparison on K8";
    case 5: return "Bramson-Griffeath d=1";
    case 6: return "mean-field window torus(3,10)";
    case 7: return "Gamma(2,2) moments";
    case 8: return "configuration model";
    case 9: return "reversal identity";
    case 10: return "Arratia negativity";
    case 11: return "determinism across workers";
  }
  return "unknown";
}

}  // namespace

CriterionResult run_criterion(int id, const VerifyOptions& opts) {
  CriterionResult r;
  r.id = id;
  r.title = title_of(id);
  Recorder rec(r, opts);
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (id) {
      case 1: criterion_exact_identities(rec, opts); break;
      case 2: criterion_occupancy(rec); break;
      case 3: criterion_duality(rec); break;
      case 4: criterion_kingman(rec); break;
      case 5: criterion_bramson_griffeath(rec); break;
      case 6: criterion_torus_window(rec); break;
      case 7: criterion_gamma(rec); break;
      case 8: criterion_configuration_model(rec, opts); break;
      case 9: criterion_reversal(rec); break;
      case 10: criterion_arratia(rec); break;
      case 11: criterion_determinism(rec, opts); break;
      default: throw Error(ErrorCode::ParameterOutOfRange, "criteria are numbered 1..11");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParameterOutOfRange && (id < 1 || id > 11)) throw;
    rec.check("completed", false, e.what());
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<int> suite_criteria(std::string_view suite) {
  if (suite == "exact") return {1};
  if (suite == "statistical") return {2, 3, 4, 9, 10};
  if (suite == "paper") return {5, 6, 7, 8};
  if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  throw Error(ErrorCode::ParameterOutOfRange, "unknown suite '" + std::string(suite) + "'");
}

SuiteReport run_suite(std::string_view suite, const VerifyOptions& opts) {
  SuiteReport report;
  report.suite = suite;
  for (int id : suite_criteria(suite)) report.criteria.push_back(run_criterion(id, opts));
  return report;
}

}  // namespace crw
