// ahc: operator CLI for the handover pipeline.
//
//   ahc generate-traces   [--config F] [--seed N] [--out DIR]
//   ahc train-predictors  [--config F] [--seed N] [--out DIR]
//   ahc train-policy      [--config F] [--seed N] [--out DIR]
//   ahc simulate          [--config F] [--seed N] [--out DIR] [--controllers NAME]
//   ahc compare           [--config F] [--seed N] [--out DIR] [--controllers LIST] [--runs N] [--workers N]
//
// Every command also takes --set key.path=value (repeatable). Without
// --config the path in $AHC_CONFIG is used, and without either the built-in
// defaults. Exit codes: 0 ok, 1 validation, 2 missing artifact, 3 runtime.

#include <CLI11.hpp>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>

#include "ahc/pipeline.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kMissing = 2, kRuntime = 3 };

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> controllers;
  std::optional<int> runs;
  std::optional<int> workers;
  std::vector<std::string> overrides;
};

ahc::RunConfig resolve_config(const Options& o) {
  ahc::RunConfig cfg;
  std::string path = o.config_path;
  if (path.empty())
    if (const char* env = std::getenv("AHC_CONFIG"); env && *env) path = env;
  if (!path.empty()) cfg = ahc::load_config(path);
  for (const auto& kv : o.overrides) ahc::apply_override(cfg, kv);
  if (o.out) cfg.output_dir = *o.out;
  if (o.runs) cfg.sim.n_runs = *o.runs;
  if (o.workers) cfg.sim.workers = *o.workers;
  cfg.validate();
  return cfg;
}

void print_summary(const ahc::CampaignResult& result) {
  std::cout << std::left << std::setw(14) << "controller" << std::setw(20) << "kpi" << std::right << std::setw(12)
            << "mean" << std::setw(12) << "ci_half" << "\n";
  for (const auto& s : result.summaries)
    for (std::string_view kpi : ahc::kSummaryKpis) {
      const auto& st = ahc::summary_stat(s.aggregate, kpi);
      std::cout << std::left << std::setw(14) << ahc::controller_name(s.controller) << std::setw(20) << kpi
                << std::right << std::setw(12) << std::setprecision(5) << st.mean << std::setw(12) << st.half_width
                << "\n";
    }
}

int run(const std::string& command, const Options& o) {
  ahc::RunConfig cfg = resolve_config(o);
  if (command == "generate-traces") {
    if (o.seed) cfg.training.trace_seed = *o.seed;
    const auto entries = ahc::generate_traces(cfg);
    for (const auto& e : entries)
      std::cout << "seed " << e.seed << "  " << e.file << "  rows " << e.rows << "  fnv1a64 " << e.fnv1a64 << "\n";
    std::cout << "wrote " << ahc::OutputLayout(cfg).traces().string() << "/manifest.json\n";
  } else if (command == "train-predictors") {
    if (o.seed) cfg.training.predictor_seed = *o.seed;
    const auto report = ahc::train_predictors_stage(cfg);
    ahc::print_predictor_report(std::cout, report);
    std::cout << "wrote " << ahc::OutputLayout(cfg).models().string() << "\n";
  } else if (command == "train-policy") {
    if (o.seed) cfg.training.policy_seed = *o.seed;
    const auto result = ahc::train_policy_stage(cfg, &std::cout);
    std::cout << "wrote " << ahc::OutputLayout(cfg).policy_file().string() << " (" << result.curve.size()
              << " episodes)\n";
  } else if (command == "simulate") {
    const auto kinds = ahc::parse_controller_list(o.controllers.value_or("a3"));
    if (kinds.size() != 1) throw std::invalid_argument("simulate takes exactly one controller");
    const std::uint64_t seed = o.seed.value_or(cfg.sim.base_seed);
    const auto out = ahc::simulate_stage(cfg, kinds[0], seed);
    const auto& k = out.result.kpi;
    std::cout << ahc::controller_name(kinds[0]) << " seed " << seed << ": throughput " << k.mean_throughput_mbps
              << " Mbps, handover rate " << k.handover_rate << ", ping-pong " << k.pingpong_rate_pct
              << "%, failures " << k.handover_failures << "/" << k.handover_attempts << "\n";
    std::cout << "wrote " << out.directory.string() << "\n";
  } else if (command == "compare") {
    if (o.seed) cfg.sim.base_seed = *o.seed;
    std::vector<ahc::ControllerKind> kinds(ahc::kAllControllers.begin(), ahc::kAllControllers.end());
    if (o.controllers) kinds = ahc::parse_controller_list(*o.controllers);
    const auto result = ahc::compare_stage(cfg, kinds);
    print_summary(result);
    std::cout << "wrote " << ahc::OutputLayout(cfg).compare().string() << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"O-RAN mobility-aware handover pipeline"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"generate-traces", "Write mobility trace CSVs and a manifest"},
      {"train-predictors", "Train the mode classifier and the trajectory/RSRP forests"},
      {"train-policy", "Train the rApp ranking policy on the simulator"},
      {"simulate", "Run one recorded simulation"},
      {"compare", "Run the multi-seed controller campaign"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config_path, "Config file (default: $AHC_CONFIG, else built-in defaults)");
    sub->add_option("--seed", o.seed, "Seed override for this command");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--set", o.overrides, "Config override key.path=value (repeatable)");
    if (name == "simulate" || name == "compare")
      sub->add_option("--controllers", o.controllers, "Comma-separated: a3,load_balance,ml_assisted,ahc");
    if (name == "compare") {
      sub->add_option("--runs", o.runs, "Runs per controller");
      sub->add_option("--workers", o.workers, "Worker threads (0 = all processors)");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, o);
  } catch (const ahc::MissingArtifact& e) {
    std::cerr << "ahc " << command << ": " << e.what() << "\n";
    return kMissing;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ahc " << command << ": invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "ahc " << command << ": " << e.what() << "\n";
    return kRuntime;
  }
}
