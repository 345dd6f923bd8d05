#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "crw/chain.hpp"
#include "crw/crw_sim.hpp"
#include "crw/csv.hpp"
#include "crw/error.hpp"
#include "crw/experiment.hpp"
#include "crw/meeting.hpp"
#include "crw/parallel.hpp"
#include "crw/verify.hpp"
#include "crw/version.hpp"
#include "crw/voter.hpp"

namespace fs = std::filesystem;
using namespace crw;

namespace {

RateConvention parse_convention(const std::string& s) {
  if (s == "per_edge_unit") return RateConvention::PerEdgeUnit;
  if (s == "total_unit") return RateConvention::TotalUnit;
  throw Error(ErrorCode::ParameterOutOfRange, "rate convention must be per_edge_unit or total_unit");
}

// Writes to `path`, or stdout when empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParameterOutOfRange, "cannot open '" + path + "' for writing");
  fn(out);
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  CsvWriter csv(out);
  std::vector<std::string> row(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = format_real(m(i, j));
    csv.row(row);
  }
}

struct GraphArgs {
  std::string json;
  std::string convention = "per_edge_unit";

  void add(CLI::App* app) {
    app->add_option("--graph", json, R"(graph spec, e.g. {"family":"cycle","n":8})")->required();
    app->add_option("--rate-convention", convention, "per_edge_unit | total_unit");
  }
  Graph graph() const { return build_graph(parse_graph_spec(json, "--graph"), fs::current_path()); }
  MarkovChain chain() const { return build_generator(graph(), parse_convention(convention)); }
};

int run_verify(const std::string& suite, const VerifyOptions& opts, const std::string& out_dir) {
  SuiteReport report;
  report.suite = suite;
  bool all_pass = true;
  for (int id : suite_criteria(suite)) {
    CriterionResult r = run_criterion(id, opts);
    std::printf("[%s] criterion %2d  %-32s %7.1fs\n", r.passed() ? "PASS" : "FAIL", r.id, r.title.c_str(), r.seconds);
    for (const Check& c : r.checks)
      if (!c.pass) std::printf("         %s: %s\n", c.name.c_str(), c.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && r.passed();
    report.criteria.push_back(std::move(r));
  }
  bool header = false;
  for (const auto& r : report.criteria)
    for (const auto& line : r.table) {
      if (!header) std::printf("\nmeasured t*P_t against mean-field and lattice predictions\n");
      header = true;
      std::printf("  %s\n", line.c_str());
    }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / "data.csv", std::ios::binary) << report.data_csv();
    std::ofstream checks(fs::path(out_dir) / "checks.csv", std::ios::binary);
    CsvWriter csv(checks);
    csv.row({"criterion", "check", "pass", "detail"});
    for (const auto& r : report.criteria)
      for (const auto& c : r.checks) csv.row({std::to_string(r.id), c.name, c.pass ? "1" : "0", c.detail});
  }
  std::printf("%s: %s\n", suite.c_str(), all_pass ? "PASS" : "FAIL");
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coalescing random walks and voter model toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write a graph as an edge list");
  GraphArgs gen_graph;
  std::string gen_out;
  gen_graph.add(gen);
  gen->add_option("-o,--out", gen_out, "output file (default stdout)");

  // exact
  auto* exact = app.add_subcommand("exact", "exact chain quantities as CSV");
  GraphArgs exact_graph;
  std::string exact_what = "density";
  double exact_t = 1.0;
  std::string exact_out;
  exact_graph.add(exact);
  exact->add_option("what", exact_what, "density | transition | spectrum | meeting | subset_law")
      ->check(CLI::IsMember({"density", "transition", "spectrum", "meeting", "subset_law"}));
  exact->add_option("-t,--time", exact_t, "time");
  exact->add_option("-o,--out", exact_out, "output file (default stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "sample CRW or voter trajectories");
  GraphArgs sim_graph;
  std::string sim_model = "crw";
  std::vector<double> sim_times{1.0};
  std::size_t sim_reps = 10;
  std::uint64_t sim_seed = 1;
  unsigned sim_threads = 0;
  std::vector<Vertex> sim_sites;
  std::string sim_out;
  sim_graph.add(sim);
  sim->add_option("--model", sim_model, "crw | voter")->check(CLI::IsMember({"crw", "voter"}));
  sim->add_option("--times", sim_times, "sorted grid times")->expected(1, -1);
  sim->add_option("--replicates", sim_reps)->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed);
  sim->add_option("--threads", sim_threads, "workers (default COALESCE_THREADS, else 1)");
  sim->add_option("--sites", sim_sites, "occupancy columns to record (crw)");
  sim->add_option("-o,--out", sim_out, "output file (default stdout)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a JSON experiment config");
  std::string exp_config;
  unsigned exp_threads = 0;
  exp->add_option("config", exp_config, "config.json")->required();
  exp->add_option("--threads", exp_threads, "workers (default COALESCE_THREADS, else 1)");
  exp->footer(std::string(task_ops_help()));

  // verify
  auto* ver = app.add_subcommand("verify", "run a bundled verification suite");
  std::string ver_suite;
  VerifyOptions ver_opts;
  unsigned ver_threads = 0;
  std::string ver_out;
  ver->add_option("suite", ver_suite, "exact | statistical | paper | all")
      ->required()
      ->check(CLI::IsMember({"exact", "statistical", "paper", "all"}));
  ver->add_option("--seed", ver_opts.seed);
  ver->add_option("--threads", ver_threads, "workers (default COALESCE_THREADS, else 1)");
  ver->add_option("--out", ver_out, "directory for data.csv and checks.csv");
  ver->add_option("--tolerance-scale", ver_opts.tolerance_scale, "multiplies every tolerance and window half-width");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const Graph g = gen_graph.graph();
      with_output(gen_out, [&](std::ostream& out) { write_graph(out, g); });
    } else if (*exact) {
      const MarkovChain c = exact_graph.chain();
      with_output(exact_out, [&](std::ostream& out) {
        CsvWriter csv(out);
        if (exact_what == "density") {
          csv.row({"x", "P_t"});
          const auto p = exact_occupancy_density(c, exact_t);
          for (std::size_t x = 0; x < p.size(); ++x) csv.row({std::to_string(x), format_real(p[x])});
        } else if (exact_what == "transition") {
          write_matrix(out, transition_matrix(c, exact_t));
        } else if (exact_what == "spectrum") {
          const Spectrum sp = spectrum(c);
          csv.row({"index", "eigenvalue"});
          for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i)
            csv.row({std::to_string(i), format_real(sp.eigenvalues[i])});
        } else if (exact_what == "meeting") {
          write_matrix(out, pairwise_meeting_times(c).pairwise);
        } else {
          csv.row({"subset_mask", "probability"});
          const auto law = exact_subset_law(c, exact_t);
          for (std::size_t s = 0; s < law.size(); ++s) csv.row({std::to_string(s + 1), format_real(law[s])});
        }
      });
    } else if (*sim) {
      const MarkovChain c = sim_graph.chain();
      const RingSampler rings(c);
      const unsigned threads = resolve_threads(sim_threads);
      for (std::size_t i = 1; i < sim_times.size(); ++i)
        if (sim_times[i] < sim_times[i - 1] || sim_times[0] < 0.0)
          throw Error(ErrorCode::ParameterOutOfRange, "--times must be sorted and nonnegative");
      if (sim_model == "crw") {
        CrwTracking track;
        track.cluster = true;
        track.sites = sim_sites;
        std::vector<CrwTrajectory> runs(sim_reps);
        parallel_for(sim_reps, threads, [&](std::size_t i) {
          Rng rng(derive_seed(sim_seed, stream_key("trajectory"), i));
          runs[i] = simulate_crw(rings, sim_times, rng, track);
        });
        with_output(sim_out, [&](std::ostream& out) { write_trajectory_csv(out, runs, sim_sites); });
      } else {
        std::vector<VoterTrajectory> runs(sim_reps);
        parallel_for(sim_reps, threads, [&](std::size_t i) {
          Rng rng(derive_seed(sim_seed, stream_key("voter"), i));
          runs[i] = simulate_voter(rings, sim_times, rng);
        });
        with_output(sim_out, [&](std::ostream& out) { write_voter_csv(out, runs); });
      }
    } else if (*exp) {
      const ExperimentResult r = run_experiment(fs::path(exp_config), exp_threads);
      for (const auto& t : r.tasks) std::printf("%-20s %-14s %8zu rows  %s\n", t.name.c_str(), t.op.c_str(), t.rows, t.file.string().c_str());
      std::printf("manifest: %s\n", r.manifest.string().c_str());
    } else if (*ver) {
      ver_opts.threads = resolve_threads(ver_threads);
      return run_verify(ver_suite, ver_opts, ver_out);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "coalesce: %s: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return 2;
  }
  return 0;
}
