#include "crw/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "crw/csv.hpp"
#include "crw/error.hpp"
#include "crw/meeting.hpp"
#include "crw/parallel.hpp"
#include "crw/theory.hpp"
#include "crw/version.hpp"
#include "json.hpp"

namespace crw {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ConfigError, path + ": " + what);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) config_error(path, "expected an object");
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) config_error(path + "." + key, "unknown field");
  }
}

const json& field(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) config_error(path + "." + key, "missing required field");
  return j.at(key);
}

std::int64_t get_int(const json& j, const std::string& path, std::int64_t lo, std::int64_t hi) {
  if (!j.is_number_integer()) config_error(path, "expected an integer");
  const auto v = j.get<std::int64_t>();
  if (v < lo || v > hi) config_error(path, "value out of range");
  return v;
}

std::uint64_t get_u64(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    config_error(path, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

double get_real(const json& j, const std::string& path) {
  if (!j.is_number()) config_error(path, "expected a number");
  return j.get<double>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) config_error(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) config_error(path, "expected a string");
  return j.get<std::string>();
}

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(what, std::string("invalid JSON: ") + e.what());
  }
}

GraphSpec graph_spec_from(const json& j, const std::string& path) {
  require_object(j, path);
  GraphSpec spec;
  constexpr std::int64_t kMaxN = 50'000'000;
  if (j.contains("file")) {
    reject_unknown(j, path, {"file"});
    spec.kind = GraphSpec::Kind::File;
    spec.file = get_string(j.at("file"), path + ".file");
    return spec;
  }
  if (j.contains("configuration_model")) {
    reject_unknown(j, path, {"configuration_model"});
    const std::string p = path + ".configuration_model";
    const json& cm = j.at("configuration_model");
    require_object(cm, p);
    reject_unknown(cm, p, {"degrees", "n", "seed", "require_connected", "max_retries", "collapse_multiedges"});
    spec.kind = GraphSpec::Kind::ConfigurationModel;
    const json& deg = field(cm, p, "degrees");
    if (!deg.is_array() || deg.empty()) config_error(p + ".degrees", "expected a nonempty array of [degree, probability]");
    for (std::size_t i = 0; i < deg.size(); ++i) {
      const std::string q = p + ".degrees[" + std::to_string(i) + "]";
      if (!deg[i].is_array() || deg[i].size() != 2) config_error(q, "expected [degree, probability]");
      spec.degrees.push_back({static_cast<int>(get_int(deg[i][0], q + "[0]", 0, 1'000'000)), get_real(deg[i][1], q + "[1]")});
    }
    try {
      DegreeDistribution check(spec.degrees);
    } catch (const Error& e) {
      config_error(p + ".degrees", e.what());
    }
    spec.cm_n = static_cast<std::size_t>(get_int(field(cm, p, "n"), p + ".n", 2, kMaxN));
    if (cm.contains("seed")) spec.cm_seed = get_u64(cm.at("seed"), p + ".seed");
    if (cm.contains("require_connected"))
      spec.cm_options.require_connected = get_bool(cm.at("require_connected"), p + ".require_connected");
    if (cm.contains("max_retries"))
      spec.cm_options.max_retries = static_cast<int>(get_int(cm.at("max_retries"), p + ".max_retries", 1, 1'000'000));
    if (cm.contains("collapse_multiedges"))
      spec.cm_options.collapse_multiedges = get_bool(cm.at("collapse_multiedges"), p + ".collapse_multiedges");
    return spec;
  }
  const std::string family = get_string(field(j, path, "family"), path + ".family");
  if (family == "cycle" || family == "complete" || family == "path") {
    reject_unknown(j, path, {"family", "n"});
    const auto n = static_cast<int>(get_int(field(j, path, "n"), path + ".n", family == "cycle" ? 3 : 2, kMaxN));
    if (family == "path") {
      spec.kind = GraphSpec::Kind::Path;
      spec.path_n = n;
    } else {
      spec.family = family == "cycle" ? Family::cycle(n) : Family::complete(n);
    }
  } else if (family == "torus") {
    reject_unknown(j, path, {"family", "d", "L"});
    spec.family = Family::torus(static_cast<int>(get_int(field(j, path, "d"), path + ".d", 1, 30)),
                                static_cast<int>(get_int(field(j, path, "L"), path + ".L", 3, kMaxN)));
  } else if (family == "hypercube") {
    reject_unknown(j, path, {"family", "d"});
    spec.family = Family::hypercube(static_cast<int>(get_int(field(j, path, "d"), path + ".d", 1, 24)));
  } else {
    config_error(path + ".family", "unknown family '" + family + "'");
  }
  return spec;
}

// Ops and the parameters each accepts.
struct OpInfo {
  std::string_view name;
  std::initializer_list<std::string_view> params;
  std::string_view help;
};

const OpInfo kOps[] = {
    {"trajectory", {"track_cluster", "sites"}, "CRW trajectories: replicate,t,xi_size,N_t,occ_<v>..."},
    {"density", {}, "density estimate: t,p_hat,stderr,variance_ratio"},
    {"voter", {"designated"}, "voter samples: replicate,t,nhat"},
    {"tau_coal", {}, "coalescence times: replicate,tau_coal"},
    {"exact_density", {}, "subset-chain occupancy (n <= 12): t,vertex,P_t"},
    {"meeting", {"mode"}, "meeting times (mode exact|mc): quantity,value"},
    {"alpha", {"x", "mode"}, "alpha_t(x) (mode exact|mc): t,alpha,stderr,lower95,upper95"},
    {"spectrum", {}, "generator spectrum: index,eigenvalue"},
    {"duality", {"x"}, "CRW / voter duality gaps: t,quantity,gap,stderr"},
    {"predictions", {"x", "psi", "dimension"}, "mean-field predictions: label,t,value,stderr (+ JSON report)"},
};

const OpInfo* find_op(const std::string& op) {
  for (const OpInfo& info : kOps)
    if (info.name == op) return &info;
  return nullptr;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv(std::string_view s) { return stream_key(s); }

}  // namespace

GraphSpec parse_graph_spec(std::string_view json_text, const std::string& where) {
  return graph_spec_from(parse_json(json_text, where), where);
}

Graph build_graph(const GraphSpec& spec, const std::filesystem::path& base_dir) {
  switch (spec.kind) {
    case GraphSpec::Kind::Family:
      return make_transitive(spec.family);
    case GraphSpec::Kind::Path:
      return make_path(spec.path_n);
    case GraphSpec::Kind::File: {
      const std::filesystem::path p = spec.file.is_absolute() || base_dir.empty() ? spec.file : base_dir / spec.file;
      std::ifstream in(p);
      if (!in) throw Error(ErrorCode::ConfigError, "graph.file: cannot open '" + p.string() + "'");
      return read_graph(in);
    }
    case GraphSpec::Kind::ConfigurationModel: {
      Rng rng(derive_seed(spec.cm_seed, stream_key("configuration_model"), 0));
      return sample_configuration_model(DegreeDistribution(spec.degrees), spec.cm_n, rng, spec.cm_options);
    }
  }
  throw Error(ErrorCode::ConfigError, "graph: unsupported kind");
}

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  const json doc = parse_json(json_text, "config");
  const std::string root = "config";
  require_object(doc, root);
  reject_unknown(doc, root, {"schema", "graph", "rate_convention", "times", "replicates", "master_seed", "outputs", "tasks"});
  if (get_int(field(doc, root, "schema"), "schema", 0, 1'000'000) != 1) config_error("schema", "only schema 1 is supported");

  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  cfg.source_json = doc.dump(2);
  if (!doc.contains("graph")) config_error("graph", "missing required field");
  cfg.graph = graph_spec_from(doc.at("graph"), "graph");

  if (doc.contains("rate_convention")) {
    const std::string rc = get_string(doc.at("rate_convention"), "rate_convention");
    if (rc == "per_edge_unit")
      cfg.convention = RateConvention::PerEdgeUnit;
    else if (rc == "total_unit")
      cfg.convention = RateConvention::TotalUnit;
    else
      config_error("rate_convention", "expected per_edge_unit or total_unit");
  }

  if (!doc.contains("times")) config_error("times", "missing required field");
  const json& times = doc.at("times");
  if (!times.is_array() || times.empty()) config_error("times", "expected a nonempty array");
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = get_real(times[i], "times[" + std::to_string(i) + "]");
    if (!(t >= 0.0) || !std::isfinite(t)) config_error("times[" + std::to_string(i) + "]", "times must be finite and nonnegative");
    if (!cfg.times.empty() && t < cfg.times.back()) config_error("times[" + std::to_string(i) + "]", "times must be sorted");
    cfg.times.push_back(t);
  }

  if (!doc.contains("replicates")) config_error("replicates", "missing required field");
  cfg.replicates = static_cast<std::size_t>(get_int(doc.at("replicates"), "replicates", 1, 1'000'000'000));
  if (!doc.contains("master_seed")) config_error("master_seed", "missing required field");
  cfg.master_seed = get_u64(doc.at("master_seed"), "master_seed");
  if (!doc.contains("outputs")) config_error("outputs", "missing required field");
  cfg.outputs = get_string(doc.at("outputs"), "outputs");

  if (!doc.contains("tasks")) config_error("tasks", "missing required field");
  const json& tasks = doc.at("tasks");
  if (!tasks.is_array() || tasks.empty()) config_error("tasks", "expected a nonempty array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string p = "tasks[" + std::to_string(i) + "]";
    const json& t = tasks[i];
    require_object(t, p);
    reject_unknown(t, p, {"name", "op", "params"});
    TaskSpec task;
    task.name = get_string(field(t, p, "name"), p + ".name");
    if (task.name.empty() || task.name.find_first_of("/\\") != std::string::npos)
      config_error(p + ".name", "names must be nonempty and free of path separators");
    if (!names.insert(task.name).second) config_error(p + ".name", "duplicate task name '" + task.name + "'");
    task.op = get_string(field(t, p, "op"), p + ".op");
    const OpInfo* info = find_op(task.op);
    if (!info) config_error(p + ".op", "unknown op '" + task.op + "'");
    json params = json::object();
    if (t.contains("params")) {
      params = t.at("params");
      require_object(params, p + ".params");
      reject_unknown(params, p + ".params", info->params);
    }
    const std::string pp = p + ".params";
    if (params.contains("track_cluster")) get_bool(params.at("track_cluster"), pp + ".track_cluster");
    if (params.contains("sites")) {
      if (!params.at("sites").is_array()) config_error(pp + ".sites", "expected an array of vertices");
      for (std::size_t s = 0; s < params.at("sites").size(); ++s)
        get_int(params.at("sites")[s], pp + ".sites[" + std::to_string(s) + "]", 0, 0xfffffffe);
    }
    for (const char* v : {"designated", "x"})
      if (params.contains(v)) get_int(params.at(v), pp + "." + v, 0, 0xfffffffe);
    if (params.contains("mode")) {
      const std::string mode = get_string(params.at("mode"), pp + ".mode");
      if (mode != "exact" && mode != "mc") config_error(pp + ".mode", "expected exact or mc");
    }
    if (params.contains("psi") && !(get_real(params.at("psi"), pp + ".psi") > 0.0))
      config_error(pp + ".psi", "must be positive");
    if (params.contains("dimension")) get_int(params.at("dimension"), pp + ".dimension", 1, 30);
    task.params_json = params.dump();
    cfg.tasks.push_back(std::move(task));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "config: cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string_view task_ops_help() {
  static const std::string text = [] {
    std::string s;
    for (const OpInfo& info : kOps) s += "  " + std::string(info.name) + ": " + std::string(info.help) + "\n";
    return s;
  }();
  return text;
}

namespace {

struct TaskContext {
  const ExperimentConfig& cfg;
  const Graph& graph;
  const MarkovChain& chain;
  McOptions mc;
  json params;
};

Vertex vertex_param(const TaskContext& ctx, const char* key) {
  const auto v = ctx.params.value(key, std::uint64_t{0});
  if (v >= ctx.chain.n()) throw Error(ErrorCode::ParameterOutOfRange, std::string(key) + " is not a vertex");
  return static_cast<Vertex>(v);
}

bool exact_mode(const TaskContext& ctx) { return ctx.params.value("mode", std::string("exact")) == "exact"; }

// t_meet under pi x pi: pairwise solve when feasible, eigentime identity for
// larger transitive chains, Monte Carlo otherwise.
double task_t_meet(const TaskContext& ctx) {
  const std::size_t n = ctx.chain.n();
  if (n * n <= kMaxProductStates) return mean_meeting_time(ctx.chain, MeetingMode::PiPi);
  if (ctx.chain.is_transitive()) {
    const Spectrum sp = spectrum(ctx.chain);
    KahanSum s;
    for (std::size_t i = 1; i < sp.eigenvalues.size(); ++i) s.add(1.0 / sp.eigenvalues[i]);
    return s.value() / 2.0;
  }
  return estimate_meeting_time_mc(ctx.chain, MeetingMode::PiPi, ctx.mc).mean;
}

std::size_t run_task(const TaskSpec& task, TaskContext& ctx, std::ostream& out, const std::filesystem::path& dir) {
  const auto& times = ctx.cfg.times;
  const std::size_t reps = ctx.cfg.replicates;
  CsvWriter csv(out);

  if (task.op == "trajectory") {
    CrwTracking track;
    track.cluster = ctx.params.value("track_cluster", true);
    for (const auto& s : ctx.params.value("sites", json::array())) {
      const auto v = s.get<std::uint64_t>();
      if (v >= ctx.chain.n()) throw Error(ErrorCode::ParameterOutOfRange, "site is not a vertex");
      track.sites.push_back(static_cast<Vertex>(v));
    }
    const RingSampler rings(ctx.chain);
    const std::uint64_t key = stream_key("trajectory");
    std::vector<CrwTrajectory> runs(reps);
    parallel_for(reps, ctx.mc.threads, [&](std::size_t i) {
      Rng rng(derive_seed(ctx.mc.seed, key, i));
      runs[i] = simulate_crw(rings, times, rng, track);
    });
    write_trajectory_csv(out, runs, track.sites);
    return reps * times.size();
  }
  if (task.op == "density") {
    McOptions mc = ctx.mc;
    mc.reps = std::max<std::size_t>(reps, 2);
    const DensityEstimate est = estimate_density(ctx.chain, times, mc);
    csv.row({"t", "p_hat", "stderr", "variance_ratio"});
    for (std::size_t j = 0; j < times.size(); ++j)
      csv.row({format_real(times[j]), format_real(est.p_hat[j]), format_real(est.std_error[j]), format_real(est.variance_ratio[j])});
    return times.size();
  }
  if (task.op == "voter") {
    const Vertex x = vertex_param(ctx, "designated");
    const RingSampler rings(ctx.chain);
    const std::uint64_t key = stream_key("voter");
    std::vector<VoterTrajectory> runs(reps);
    parallel_for(reps, ctx.mc.threads, [&](std::size_t i) {
      Rng rng(derive_seed(ctx.mc.seed, key, i));
      runs[i] = simulate_voter(rings, times, rng, x);
    });
    write_voter_csv(out, runs);
    return reps * times.size();
  }
  if (task.op == "tau_coal") {
    const std::vector<double> tau = sample_tau_coal(ctx.chain, ctx.mc);
    csv.row({"replicate", "tau_coal"});
    for (std::size_t i = 0; i < tau.size(); ++i) csv.row({std::to_string(i), format_real(tau[i])});
    return tau.size();
  }
  if (task.op == "exact_density") {
    csv.row({"t", "vertex", "P_t"});
    for (double t : times) {
      const std::vector<double> p = exact_occupancy_density(ctx.chain, t);
      for (std::size_t v = 0; v < p.size(); ++v) csv.row({format_real(t), std::to_string(v), format_real(p[v])});
    }
    return times.size() * ctx.chain.n();
  }
  if (task.op == "meeting") {
    csv.row({"quantity", "value"});
    if (exact_mode(ctx)) {
      const MeetingProfile prof = pairwise_meeting_times(ctx.chain);
      csv.row({"t_meet_pi", format_real(prof.t_meet_pi)});
      csv.row({"t_meet_distinct", format_real(prof.t_meet_distinct)});
      csv.row({"max_residual", format_real(prof.max_residual)});
      csv.row({"rmax_diagnostic", format_real(prof.t_meet_pi * ctx.chain.r_max() / static_cast<double>(ctx.chain.n()))});
      return 4;
    }
    const MeetingTimeEstimate est = estimate_meeting_time_mc(ctx.chain, MeetingMode::PiPi, ctx.mc);
    csv.row({"t_meet_pi", format_real(est.mean)});
    csv.row({"stderr", format_real(est.std_error)});
    csv.row({"runs", std::to_string(est.runs)});
    csv.row({"censored", std::to_string(est.censored)});
    return 4;
  }
  if (task.op == "alpha") {
    const Vertex x = vertex_param(ctx, "x");
    const bool exact = exact_mode(ctx);
    csv.row({"t", "alpha", "stderr", "lower95", "upper95"});
    for (double t : times) {
      McOptions mc = ctx.mc;
      mc.reps = std::max<std::size_t>(reps, 2);
      const AlphaEstimate a = exact ? alpha_survival_exact(ctx.chain, x, t) : alpha_survival_mc(ctx.chain, x, t, mc);
      csv.row({format_real(t), format_real(a.value), format_real(a.std_error), format_real(a.lower95), format_real(a.upper95)});
    }
    return times.size();
  }
  if (task.op == "spectrum") {
    const Spectrum sp = spectrum(ctx.chain);
    csv.row({"index", "eigenvalue"});
    for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i) csv.row({std::to_string(i), format_real(sp.eigenvalues[i])});
    return sp.eigenvalues.size();
  }
  if (task.op == "duality") {
    const Vertex x = vertex_param(ctx, "x");
    McOptions mc = ctx.mc;
    mc.reps = std::max<std::size_t>(reps, 2);
    csv.row({"t", "quantity", "gap", "stderr"});
    std::size_t rows = 0;
    for (double t : times) {
      const DualityReport r = duality_gap(ctx.chain, t, mc, {x, false});
      const std::string ts = format_real(t);
      csv.row({ts, "ks_nhat_vs_Nt", format_real(r.ks_nhat_vs_Nt), format_real(r.ks_threshold)});
      csv.row({ts, "survival_vs_density", format_real(r.survival_vs_density.gap), format_real(r.survival_vs_density.std_error)});
      csv.row({ts, "density_vs_inverse_N", format_real(r.density_vs_inverse_N.gap), format_real(r.density_vs_inverse_N.std_error)});
      for (std::size_t k = 0; k < r.size_bias.size(); ++k)
        csv.row({ts, "size_bias_k" + std::to_string(k + 1), format_real(r.size_bias[k].gap), format_real(r.size_bias[k].std_error)});
      for (std::size_t m = 0; m < r.tail_identity.size(); ++m)
        csv.row({ts, "tail_M" + std::to_string(m + 2), format_real(r.tail_identity[m].gap), format_real(r.tail_identity[m].std_error)});
      rows += 3 + r.size_bias.size() + r.tail_identity.size();
    }
    return rows;
  }
  if (task.op == "predictions") {
    const Vertex x = vertex_param(ctx, "x");
    const double n = static_cast<double>(ctx.chain.n());
    const double t_meet = task_t_meet(ctx);
    const bool exact_alpha = ctx.chain.n() * ctx.chain.n() <= kMaxProductStates;
    std::vector<Prediction> records;
    csv.row({"label", "t", "value", "stderr"});
    for (double t : times) {
      if (t <= 0.0) continue;
      McOptions mc = ctx.mc;
      mc.reps = std::max<std::size_t>(reps, 2);
      const AlphaEstimate a = exact_alpha ? alpha_survival_exact(ctx.chain, x, t) : alpha_survival_mc(ctx.chain, x, t, mc);
      const MeanField mf = mean_field_predictions(n, t, t_meet, a.value);
      Prediction p1{"A1", mf.A1, {{"t", t}, {"alpha_t", a.value}, {"n", n}}, std::nullopt};
      if (!exact_alpha) p1.std_error = mf.A1 * a.std_error / a.value;
      Prediction p2{"A2", mf.A2, {{"t", t}, {"t_meet", t_meet}, {"n", n}}, std::nullopt};
      records.push_back(p1);
      records.push_back(p2);
      if (ctx.params.contains("dimension")) {
        const int d = ctx.params.at("dimension").get<int>();
        std::optional<double> psi;
        if (ctx.params.contains("psi")) psi = ctx.params.at("psi").get<double>();
        if (d != 2 || t > 1.0) {
          Prediction bg{"BG(" + std::to_string(d) + ")", bg_prediction(d, t, psi), {{"t", t}, {"d", d}}, std::nullopt};
          if (psi) bg.inputs["psi"] = *psi;
          records.push_back(bg);
        }
      }
    }
    records.push_back({"Kingman", 2.0 * t_meet * (1.0 - 1.0 / n), {{"t_meet", t_meet}, {"n", n}}, std::nullopt});
    for (const Prediction& p : records) {
      const auto it = p.inputs.find("t");
      csv.row({p.label, it == p.inputs.end() ? std::string() : format_real(it->second), format_real(p.value),
               p.std_error ? format_real(*p.std_error) : std::string()});
    }
    std::ofstream report(dir / (task.name + ".json"), std::ios::binary);
    report << predictions_to_json(records) << "\n";
    return records.size();
  }
  throw Error(ErrorCode::ConfigError, "unknown op '" + task.op + "'");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned threads) {
  threads = resolve_threads(threads);
  const Graph graph = build_graph(cfg.graph, cfg.base_dir);
  const MarkovChain chain = build_generator(graph, cfg.convention);
  std::filesystem::create_directories(cfg.outputs);

  ExperimentResult result;
  json manifest;
  manifest["schema"] = 1;
  manifest["version"] = kVersion;
  manifest["master_seed"] = cfg.master_seed;
  manifest["threads"] = threads;
  manifest["graph"] = {{"n", graph.n()}, {"edge_lines", graph.edge_line_count()}};
  manifest["tasks"] = json::array();
  const std::string graph_digest = hex64(fnv(json::parse(cfg.source_json).at("graph").dump()));

  for (const TaskSpec& task : cfg.tasks) {
    const auto start = std::chrono::steady_clock::now();
    TaskOutcome outcome;
    outcome.name = task.name;
    outcome.op = task.op;
    outcome.file = cfg.outputs / (task.name + ".csv");
    {
      std::string digest_input = graph_digest + "|" + task.op + "|" + task.params_json + "|" + std::to_string(cfg.master_seed) +
                                 "|" + std::to_string(cfg.replicates) + "|" +
                                 (cfg.convention == RateConvention::TotalUnit ? "total_unit" : "per_edge_unit");
      for (double t : cfg.times) digest_input += "|" + format_real(t);
      outcome.inputs_digest = hex64(fnv(digest_input));
    }
    TaskContext ctx{cfg, graph, chain, {}, json::parse(task.params_json)};
    ctx.mc.reps = cfg.replicates;
    ctx.mc.seed = derive_seed(cfg.master_seed, stream_key(task.name), 0);
    ctx.mc.threads = threads;
    try {
      std::ofstream out(outcome.file, std::ios::binary);
      if (!out) throw Error(ErrorCode::TaskError, "cannot write " + outcome.file.string());
      outcome.rows = run_task(task, ctx, out, cfg.outputs);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::TaskError, "task '" + task.name + "': " + e.what());
    }
    outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest["tasks"].push_back({{"name", outcome.name},
                                 {"op", outcome.op},
                                 {"file", outcome.file.filename().string()},
                                 {"rows", outcome.rows},
                                 {"inputs_digest", outcome.inputs_digest},
                                 {"wall_seconds", outcome.wall_seconds}});
    result.tasks.push_back(std::move(outcome));
  }
  // The re-runnable copy lives in the output directory, so relative graph
  // files are pinned to absolute paths.
  json replay = json::parse(cfg.source_json);
  if (cfg.graph.kind == GraphSpec::Kind::File && cfg.graph.file.is_relative())
    replay["graph"]["file"] = std::filesystem::absolute(cfg.base_dir / cfg.graph.file).string();
  manifest["config"] = replay;
  result.manifest = cfg.outputs / "manifest.json";
  std::ofstream(result.manifest, std::ios::binary) << manifest.dump(2) << "\n";
  std::ofstream(cfg.outputs / "config.json", std::ios::binary) << replay.dump(2) << "\n";
  return result;
}

ExperimentResult run_experiment(const std::filesystem::path& config_path, unsigned threads) {
  return run_experiment(load_config(config_path), threads);
}

}  // namespace crw
