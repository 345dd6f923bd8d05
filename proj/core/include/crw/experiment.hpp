#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "crw/chain.hpp"
#include "crw/graph.hpp"

namespace crw {

struct GraphSpec {
  enum class Kind { Family, Path, File, ConfigurationModel };
  Kind kind = Kind::Family;
  Family family = Family::cycle(3);
  int path_n = 0;
  std::filesystem::path file;
  std::vector<DegreeDistribution::Atom> degrees;
  std::size_t cm_n = 0;
  std::uint64_t cm_seed = 1;
  ConfigurationModelOptions cm_options;
};

// Accepted forms:
//   {"family": "cycle" | "complete" | "path", "n": N}
//   {"family": "torus", "d": D, "L": L}
//   {"family": "hypercube", "d": D}
//   {"file": "graph.txt"}
//   {"configuration_model": {"degrees": [[3, 1.0]], "n": N, "seed": S,
//     "require_connected": bool, "max_retries": R, "collapse_multiedges": bool}}
// Throws ConfigError naming the offending field, rooted at `where`.
GraphSpec parse_graph_spec(std::string_view json_text, const std::string& where = "graph");
Graph build_graph(const GraphSpec& spec, const std::filesystem::path& base_dir = {});

struct TaskSpec {
  std::string name;
  std::string op;
  std::string params_json;  // validated object, "{}" when absent
};

struct ExperimentConfig {
  GraphSpec graph;
  RateConvention convention = RateConvention::PerEdgeUnit;
  std::vector<double> times;
  std::size_t replicates = 1;
  std::uint64_t master_seed = 0;
  std::filesystem::path outputs;
  std::vector<TaskSpec> tasks;
  std::filesystem::path base_dir;  // for relative graph files
  std::string source_json;         // the validated document, re-emitted in the manifest
};

// Strict schema-1 validation; unknown fields are rejected. Throws ConfigError.
ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct TaskOutcome {
  std::string name;
  std::string op;
  std::filesystem::path file;
  std::size_t rows = 0;
  std::string inputs_digest;
  double wall_seconds = 0.0;
};

struct ExperimentResult {
  std::vector<TaskOutcome> tasks;
  std::filesystem::path manifest;
};

// One CSV per task plus manifest.json (and config.json, a re-runnable copy of
// the configuration) in config.outputs. threads = 0 defers to
// COALESCE_THREADS. Task failures are rethrown as TaskError naming the task.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads = 0);
ExperimentResult run_experiment(const std::filesystem::path& config_path, unsigned threads = 0);

std::string_view task_ops_help();

}  // namespace crw
