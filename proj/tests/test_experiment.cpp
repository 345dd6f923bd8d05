#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "crw/csv.hpp"
#include "crw/error.hpp"
#include "crw/experiment.hpp"
#include "crw/rng.hpp"

using namespace crw;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("crw_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json base_config(const fs::path& out) {
  return {{"schema", 1},
          {"graph", {{"family", "cycle"}, {"n", 8}}},
          {"times", {0.0, 0.5, 1.0, 2.0}},
          {"replicates", 50},
          {"master_seed", 42},
          {"outputs", out.string()},
          {"tasks", {{{"name", "density"}, {"op", "trajectory"}}}}};
}

std::string config_error(const json& doc) {
  try {
    parse_config(doc.dump());
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "config accepted";
  return {};
}

}  // namespace

TEST(Csv, Formatting) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(2.0), "2");
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"a", "b"});
  EXPECT_EQ(out.str(), "a,b\r\n");
  EXPECT_EQ(w.rows(), 1u);
}

TEST(Seeds, StreamsAreIndependentOfEachOther) {
  EXPECT_NE(stream_key("density"), stream_key("voter"));
  EXPECT_EQ(derive_seed(1, stream_key("a"), 5), derive_seed(1, stream_key("a"), 5));
  EXPECT_NE(derive_seed(1, stream_key("a"), 5), derive_seed(1, stream_key("a"), 6));
  EXPECT_NE(derive_seed(1, stream_key("a"), 5), derive_seed(2, stream_key("a"), 5));
}

TEST(Experiment, MinimalDensityConfig) {
  const fs::path out = scratch("minimal");
  const ExperimentResult r = run_experiment(parse_config(base_config(out).dump()), 1);
  ASSERT_EQ(r.tasks.size(), 1u);
  const std::string csv = slurp(out / "density.csv");
  EXPECT_EQ(csv.rfind("replicate,t,xi_size,N_t\r\n", 0), 0u);
  EXPECT_EQ(r.tasks[0].rows, 200u);
  const json manifest = json::parse(slurp(r.manifest));
  EXPECT_EQ(manifest["schema"], 1);
  EXPECT_EQ(manifest["master_seed"], 42);
  EXPECT_EQ(manifest["tasks"][0]["file"], "density.csv");
  EXPECT_EQ(manifest["tasks"][0]["inputs_digest"].get<std::string>().size(), 16u);
  EXPECT_TRUE(manifest["tasks"][0].contains("wall_seconds"));
}

TEST(Experiment, SameConfigSameBytes) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  run_experiment(parse_config(base_config(a).dump()), 1);
  run_experiment(parse_config(base_config(b).dump()), 1);
  EXPECT_EQ(slurp(a / "density.csv"), slurp(b / "density.csv"));
}

TEST(Experiment, WorkerCountDoesNotChangeData) {
  json cfg = base_config({});
  cfg["graph"] = {{"family", "torus"}, {"d", 2}, {"L", 5}};
  cfg["tasks"] = {{{"name", "traj"}, {"op", "trajectory"}, {"params", {{"sites", {0, 3}}}}},
                  {{"name", "dens"}, {"op", "density"}},
                  {{"name", "vote"}, {"op", "voter"}},
                  {{"name", "coal"}, {"op", "tau_coal"}},
                  {{"name", "meet"}, {"op", "meeting"}, {"params", {{"mode", "mc"}}}},
                  {{"name", "dual"}, {"op", "duality"}}};
  std::string first;
  for (unsigned threads : {1u, 3u, 8u}) {
    const fs::path out = scratch("threads" + std::to_string(threads));
    cfg["outputs"] = out.string();
    run_experiment(parse_config(cfg.dump()), threads);
    std::string all;
    for (const char* f : {"traj.csv", "dens.csv", "vote.csv", "coal.csv", "meet.csv", "dual.csv"}) all += slurp(out / f);
    if (first.empty()) first = all;
    EXPECT_EQ(all, first) << threads << " workers";
  }
}

TEST(Experiment, AddingTaskKeepsExistingStreams) {
  const fs::path a = scratch("add_a"), b = scratch("add_b");
  json one = base_config(a), two = base_config(b);
  two["tasks"].insert(two["tasks"].begin(), json::object({{"name", "extra"}, {"op", "voter"}}));
  run_experiment(parse_config(one.dump()), 1);
  run_experiment(parse_config(two.dump()), 1);
  EXPECT_EQ(slurp(a / "density.csv"), slurp(b / "density.csv"));
}

TEST(Experiment, ManifestReplaysToIdenticalData) {
  const fs::path out = scratch("replay");
  run_experiment(parse_config(base_config(out).dump()), 1);
  const std::string first = slurp(out / "density.csv");
  json replay = json::parse(slurp(out / "config.json"));
  const fs::path again = scratch("replay_again");
  replay["outputs"] = again.string();
  run_experiment(parse_config(replay.dump()), 2);
  EXPECT_EQ(slurp(again / "density.csv"), first);
  EXPECT_EQ(json::parse(slurp(out / "manifest.json"))["config"]["master_seed"], 42);
}

TEST(Experiment, GraphFromFileAndConfigurationModel) {
  const fs::path dir = scratch("graphs");
  std::ofstream(dir / "g.txt") << "crwgraph v1 3 3\n0 1 1\n0 2 1\n1 2 2\n";
  json cfg = base_config(dir / "out");
  cfg["graph"] = {{"file", "g.txt"}};
  std::ofstream(dir / "config.json") << cfg.dump();
  EXPECT_NO_THROW(run_experiment(dir / "config.json", 1));
  const json replay = json::parse(slurp(dir / "out" / "config.json"));
  EXPECT_TRUE(fs::path(replay["graph"]["file"].get<std::string>()).is_absolute());

  cfg["graph"] = {{"configuration_model", {{"degrees", {{3, 1.0}}}, {"n", 40}, {"seed", 9}, {"require_connected", true}}}};
  cfg["outputs"] = (dir / "cm").string();
  EXPECT_NO_THROW(run_experiment(parse_config(cfg.dump()), 1));
}

TEST(Experiment, ExactAndPredictionTasks) {
  json cfg = base_config(scratch("exact"));
  cfg["times"] = {0.5, 1.0};
  cfg["tasks"] = {{{"name", "occ"}, {"op", "exact_density"}},
                  {{"name", "m"}, {"op", "meeting"}},
                  {{"name", "a"}, {"op", "alpha"}},
                  {{"name", "s"}, {"op", "spectrum"}},
                  {{"name", "p"}, {"op", "predictions"}, {"params", {{"dimension", 1}}}}};
  const ExperimentResult r = run_experiment(parse_config(cfg.dump()), 1);
  EXPECT_EQ(r.tasks.size(), 5u);
  const json p = json::parse(slurp(fs::path(cfg["outputs"].get<std::string>()) / "p.json"));
  ASSERT_TRUE(p.is_array());
  EXPECT_GT(p.size(), 0u);
  for (const auto& rec : p) EXPECT_GT(rec["value"].get<double>(), 0.0);
}

TEST(ConfigErrors, NameTheField) {
  json doc = base_config("/tmp/unused");
  doc.erase("graph");
  EXPECT_NE(config_error(doc).find("graph"), std::string::npos);

  doc = base_config("/tmp/unused");
  doc["extra"] = 1;
  EXPECT_NE(config_error(doc).find("extra"), std::string::npos);

  doc = base_config("/tmp/unused");
  doc["tasks"][0]["params"] = {{"foo", 1}};
  EXPECT_NE(config_error(doc).find("tasks[0].params.foo"), std::string::npos);

  doc = base_config("/tmp/unused");
  doc["times"] = {1.0, 0.5};
  EXPECT_NE(config_error(doc).find("times[1]"), std::string::npos);

  doc = base_config("/tmp/unused");
  doc["times"] = {-1.0};
  EXPECT_NE(config_error(doc).find("times[0]"), std::string::npos);

  doc = base_config("/tmp/unused");
  doc["replicates"] = 0;
  EXPECT_NE(config_error(doc).find("replicates"), std::string::npos);

  doc = base_config("/tmp/unused");
  doc["schema"] = 2;
  EXPECT_NE(config_error(doc).find("schema"), std::string::npos);

  doc = base_config("/tmp/unused");
  doc["graph"] = {{"family", "cycle"}};
  EXPECT_NE(config_error(doc).find("graph.n"), std::string::npos);

  doc = base_config("/tmp/unused");
  doc["tasks"][0]["op"] = "nope";
  EXPECT_NE(config_error(doc).find("tasks[0].op"), std::string::npos);

  try {
    parse_config("{not json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(TaskErrors, NameTheTask) {
  json doc = base_config(scratch("task_error"));
  doc["graph"] = {{"family", "cycle"}, {"n", 30}};
  doc["tasks"] = {{{"name", "too_big"}, {"op", "exact_density"}}};
  try {
    run_experiment(parse_config(doc.dump()), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TaskError);
    EXPECT_NE(std::string(e.what()).find("too_big"), std::string::npos);
  }
}
