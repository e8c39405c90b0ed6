#include "ahc/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ahc/csv.hpp"
#include "ahc/sim_env.hpp"
#include "ahc/trace_io.hpp"
#include "json_codec.hpp"

namespace ahc {

namespace fs = std::filesystem;
using codec::json;

namespace {

std::ofstream open_for_write(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_for_write(path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifact("missing " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw MissingArtifact("corrupt " + path.string() + ": " + e.what());
  }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json regression_json(const RegressionReport& r) {
  json pearson = json::array();
  for (const auto& p : r.pearson_per_dim) pearson.push_back(optional_number(p));
  return {{"rmse", r.rmse},
          {"mean_bias", r.mean_bias},
          {"mae_per_dim", r.mae_per_dim},
          {"pearson_per_dim", pearson},
          {"count", r.count}};
}

json kpi_json(const KpiRecord& k) {
  return {{"throughput_mbps", k.mean_throughput_mbps},
          {"handover_rate", k.handover_rate},
          {"pingpong_rate_pct", k.pingpong_rate_pct},
          {"ho_failure_fraction", k.ho_failure_fraction},
          {"handover_attempts", k.handover_attempts},
          {"handover_failures", k.handover_failures},
          {"pingpongs", k.pingpongs},
          {"episode_utility", k.episode_utility},
          {"n_ues", k.n_ues},
          {"n_ticks", k.n_ticks}};
}

}  // namespace

std::string hash_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("missing " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::vector<TraceFileEntry> generate_traces(const RunConfig& config) {
  config.validate();
  const OutputLayout layout(config);
  fs::create_directories(layout.traces());
  std::vector<TraceFileEntry> entries;
  json files = json::array();
  for (int f = 0; f < config.training.trace_files; ++f) {
    TraceFileEntry e;
    e.seed = config.training.trace_seed + static_cast<std::uint64_t>(f);
    e.file = "traces_" + std::to_string(e.seed) + ".csv";
    const auto traces = generate_population(config.mobility, e.seed);
    for (const auto& t : traces) e.rows += t.samples.size();
    write_traces_csv(layout.traces() / e.file, traces);
    e.fnv1a64 = hash_file(layout.traces() / e.file);
    files.push_back({{"seed", e.seed}, {"file", e.file}, {"fnv1a64", e.fnv1a64}, {"rows", e.rows}});
    entries.push_back(std::move(e));
  }
  const json manifest = {{"format", "ahc-traces"},
                         {"n_ues", config.mobility.n_ues},
                         {"n_ticks", config.mobility.n_ticks},
                         {"tick_s", config.mobility.tick_s},
                         {"files", files}};
  write_text(layout.traces() / "manifest.json", manifest.dump(2) + "\n");
  return entries;
}

std::vector<Trace> load_traces(const RunConfig& config) {
  const OutputLayout layout(config);
  const fs::path manifest_path = layout.traces() / "manifest.json";
  if (!fs::exists(manifest_path)) throw MissingArtifact("no traces at " + layout.traces().string() + "; run generate-traces");
  const json manifest = read_json(manifest_path);
  std::vector<Trace> all;
  int next_id = 0;
  for (const auto& f : manifest.at("files")) {
    const fs::path path = layout.traces() / f.at("file").get<std::string>();
    if (!fs::exists(path)) throw MissingArtifact("missing trace file " + path.string());
    if (hash_file(path) != f.at("fnv1a64").get<std::string>())
      throw MissingArtifact("trace file " + path.string() + " does not match its manifest hash");
    for (Trace& t : read_traces_csv(path)) {
      t.ue_id = next_id++;  // ids repeat across files
      all.push_back(std::move(t));
    }
  }
  return all;
}

std::string predictor_report_json(const PredictorReport& r) {
  const auto& c = r.classification;
  json per_class = json::object();
  for (MobilityMode m : kAllModes) {
    const auto& pc = c.per_class[static_cast<std::size_t>(mode_index(m))];
    per_class[std::string(mode_name(m))] = {
        {"precision", pc.precision}, {"recall", pc.recall}, {"f1", pc.f1}, {"support", pc.support}};
  }
  json confusion = json::array();
  for (const auto& row : c.confusion) confusion.push_back(row);
  std::vector<std::string> labels;
  for (MobilityMode m : kAllModes) labels.emplace_back(mode_name(m));
  const json j = {
      {"classification",
       {{"accuracy", c.accuracy},
        {"self_feedback_accuracy", r.self_feedback_accuracy},
        {"per_class", per_class},
        {"labels", labels},
        {"confusion", confusion},
        {"test_size", c.total}}},
      {"trajectory", regression_json(r.trajectory)},
      {"trajectory_persistence", regression_json(r.trajectory_persistence)},
      {"rsrp", regression_json(r.rsrp)},
      {"train_traces", r.train_traces},
      {"test_traces", r.test_traces},
      {"classifier_train_rows", r.classifier_train_rows},
      {"classifier_test_rows", r.classifier_test_rows},
      {"skipped_traces", r.skipped_traces}};
  return j.dump(2) + "\n";
}

void print_predictor_report(std::ostream& out, const PredictorReport& r) {
  const auto& c = r.classification;
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(4);
  out << "mode classification: accuracy " << c.accuracy << " (self-fed previous mode " << r.self_feedback_accuracy
      << "), test rows " << c.total << "\n";
  out << "  class      precision recall  f1      support\n";
  for (MobilityMode m : kAllModes) {
    const auto& pc = c.per_class[static_cast<std::size_t>(mode_index(m))];
    out << "  " << std::left << std::setw(10) << mode_name(m) << std::right << ' ' << pc.precision << "    "
        << pc.recall << "  " << pc.f1 << "  " << pc.support << "\n";
  }
  out << "  confusion (rows true, columns predicted):\n";
  for (const auto& row : c.confusion) {
    out << "   ";
    for (int v : row) out << ' ' << std::setw(6) << v;
    out << "\n";
  }
  auto pearson = [](const RegressionReport& rr, std::size_t i) {
    return i < rr.pearson_per_dim.size() && rr.pearson_per_dim[i] ? *rr.pearson_per_dim[i] : 0.0;
  };
  out << "trajectory: RMSE " << r.trajectory.rmse << " m (persistence " << r.trajectory_persistence.rmse
      << " m), MAE x/y " << r.trajectory.mae_per_dim.at(0) << '/' << r.trajectory.mae_per_dim.at(1)
      << ", Pearson x/y " << pearson(r.trajectory, 0) << '/' << pearson(r.trajectory, 1) << "\n";
  out << "rsrp: RMSE " << r.rsrp.rmse << " dB, mean bias " << r.rsrp.mean_bias << " dB\n";
  out << std::setprecision(1) << "stage seconds: classifier " << r.classifier_seconds << ", trajectory "
      << r.trajectory_seconds << ", rsrp " << r.rsrp_seconds << "\n";
  out.flags(flags);
}

PredictorReport train_predictors_stage(const RunConfig& config) {
  config.validate();
  const auto traces = load_traces(config);
  auto trained = train_predictors(traces, config.topology.build(), config.predictors, config.mobility.tick_s,
                                  config.training.predictor_seed);
  const OutputLayout layout(config);
  trained.bundle.save(layout.models());
  write_text(layout.models() / "report.json", predictor_report_json(trained.report));
  return trained.report;
}

PredictorBundle load_predictors(const RunConfig& config) {
  const OutputLayout layout(config);
  if (!PredictorBundle::exists(layout.models()))
    throw MissingArtifact("no predictor checkpoints in " + layout.models().string() + "; run train-predictors");
  try {
    return PredictorBundle::load(layout.models());
  } catch (const std::runtime_error& e) {
    throw MissingArtifact(e.what());
  }
}

PolicyTrainResult train_policy_stage(const RunConfig& config, std::ostream* progress) {
  config.validate();
  const PredictorBundle predictors = load_predictors(config);
  SimParams params = config.sim_params();
  params.population.n_ues = config.training.policy_ues;
  SimPolicyEnv env(params, predictors, config.scaling);
  auto on_episode = [&](const CurveRow& row, const PolicyNet&) {
    if (progress && (row.episode + 1) % 10 == 0)
      *progress << "episode " << row.episode + 1 << " mean_reward " << format_double(row.mean_reward) << " entropy "
                << format_double(row.entropy) << "\n";
  };
  PolicyTrainResult result =
      train_policy(env, config.ppo, config.training.policy_episodes, config.training.policy_seed, nullptr, on_episode);
  const OutputLayout layout(config);
  fs::create_directories(layout.policy_file().parent_path());
  save_policy(layout.policy_file(), PolicyCheckpoint{result.net, config.ppo, config.scaling});
  write_curve_csv(result.curve, layout.curve_file());
  return result;
}

PolicyCheckpoint load_policy_checkpoint(const RunConfig& config) {
  const OutputLayout layout(config);
  if (!fs::exists(layout.policy_file()))
    throw MissingArtifact("no policy checkpoint at " + layout.policy_file().string() + "; run train-policy");
  try {
    return load_policy(layout.policy_file());
  } catch (const std::runtime_error& e) {
    throw MissingArtifact(e.what());
  }
}

std::vector<fs::path> missing_artifacts(const RunConfig& config, std::span<const ControllerKind> controllers) {
  const OutputLayout layout(config);
  bool need_predictors = false, need_policy = false;
  for (ControllerKind k : controllers) {
    need_predictors |= k == ControllerKind::kAhc || k == ControllerKind::kMlAssisted;
    need_policy |= k == ControllerKind::kAhc;
  }
  std::vector<fs::path> missing;
  if (need_predictors)
    for (const char* f : {"classifier.bin", "trajectory.bin", "rsrp.bin"})
      if (!fs::exists(layout.models() / f)) missing.push_back(layout.models() / f);
  if (need_policy && !fs::exists(layout.policy_file())) missing.push_back(layout.policy_file());
  return missing;
}

namespace {

struct LoadedModels {
  PredictorBundle predictors;
  PolicyCheckpoint policy;
  SimModels models;
};

std::unique_ptr<LoadedModels> load_models(const RunConfig& config, std::span<const ControllerKind> controllers) {
  const auto missing = missing_artifacts(config, controllers);
  if (!missing.empty()) {
    std::string msg = "missing checkpoints:";
    for (const auto& p : missing) msg += "\n  " + p.string();
    throw MissingArtifact(msg);
  }
  auto m = std::make_unique<LoadedModels>();
  m->models.scaling = config.scaling;
  for (ControllerKind k : controllers) {
    if ((k == ControllerKind::kAhc || k == ControllerKind::kMlAssisted) && !m->models.predictors) {
      m->predictors = load_predictors(config);
      m->models.predictors = &m->predictors;
    }
    if (k == ControllerKind::kAhc && !m->models.policy) {
      m->policy = load_policy_checkpoint(config);
      m->models.policy = &m->policy.net;
      m->models.scaling = m->policy.scaling;
    }
  }
  return m;
}

}  // namespace

SimulateOutput simulate_stage(const RunConfig& config, ControllerKind kind, std::uint64_t seed) {
  config.validate();
  const ControllerKind kinds[] = {kind};
  const auto loaded = load_models(config, kinds);
  SimulateOutput out;
  out.directory = OutputLayout(config).sim() / (std::string(controller_name(kind)) + "_seed" + std::to_string(seed));
  fs::create_directories(out.directory);
  {
    auto log = open_for_write(out.directory / "messages.jsonl");
    out.result = run_simulation(config.sim_params(), kind, seed, loaded->models, true, &log);
  }
  {
    auto f = open_for_write(out.directory / "ticks.csv");
    write_tick_csv(f, out.result.ticks);
  }
  {
    auto f = open_for_write(out.directory / "events.csv");
    write_event_csv(f, out.result.events);
  }
  json k = kpi_json(out.result.kpi);
  k["controller"] = std::string(controller_name(kind));
  k["seed"] = seed;
  write_text(out.directory / "kpi.json", k.dump(2) + "\n");
  return out;
}

CampaignResult compare_stage(const RunConfig& config, std::span<const ControllerKind> controllers) {
  config.validate();
  if (config.sim.n_runs < 2) throw std::invalid_argument("compare needs sim.n_runs >= 2");
  const auto loaded = load_models(config, controllers);
  CampaignSpec spec;
  spec.params = config.sim_params();
  spec.controllers.assign(controllers.begin(), controllers.end());
  spec.n_runs = config.sim.n_runs;
  spec.base_seed = config.sim.base_seed;
  spec.workers = config.sim.workers;
  CampaignResult result = run_campaign(spec, loaded->models);

  const fs::path dir = OutputLayout(config).compare();
  {
    auto f = open_for_write(dir / "summary.csv");
    write_summary_csv(f, result);
  }
  {
    auto f = open_for_write(dir / "runs.csv");
    write_runs_csv(f, result);
  }
  for (std::string_view kpi : kSummaryKpis) {
    auto f = open_for_write(dir / ("plot_" + std::string(kpi) + ".csv"));
    write_plot_csv(f, result, kpi);
  }
  {
    auto f = open_for_write(dir / "plot_ho_failure_fraction.csv");
    write_plot_csv(f, result, "ho_failure_fraction");
  }
  return result;
}

}  // namespace ahc
