#pragma once
// The five operator commands as library calls. Each reads and writes under
// RunConfig::output_dir:
//   traces/   trace CSVs + manifest.json      (generate-traces)
//   models/   predictor checkpoints + report  (train-predictors)
//   policy/   policy.json + curve.csv         (train-policy)
//   sim/      one directory per simulate call
//   compare/  summary, per-run and plot CSVs  (compare)

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ahc/campaign.hpp"
#include "ahc/config.hpp"
#include "ahc/ppo.hpp"
#include "ahc/predictors.hpp"
#include "ahc/simulation.hpp"

namespace ahc {

/// A required input file (traces, checkpoints) is absent or does not match
/// its manifest.
class MissingArtifact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputLayout {
  std::filesystem::path root;

  explicit OutputLayout(const RunConfig& config) : root(config.output_dir) {}
  std::filesystem::path traces() const { return root / "traces"; }
  std::filesystem::path models() const { return root / "models"; }
  std::filesystem::path policy_file() const { return root / "policy" / "policy.json"; }
  std::filesystem::path curve_file() const { return root / "policy" / "curve.csv"; }
  std::filesystem::path sim() const { return root / "sim"; }
  std::filesystem::path compare() const { return root / "compare"; }
};

/// FNV-1a 64-bit over the file bytes, as 16 lower-case hex digits.
std::string hash_file(const std::filesystem::path& path);

struct TraceFileEntry {
  std::uint64_t seed = 0;
  std::string file;  // relative to the traces directory
  std::string fnv1a64;
  std::size_t rows = 0;
};

/// One CSV per trace seed plus manifest.json.
std::vector<TraceFileEntry> generate_traces(const RunConfig& config);
/// Reads the manifest and every listed file, checking hashes.
std::vector<Trace> load_traces(const RunConfig& config);

/// Trains on the generated traces and writes checkpoints plus report.json.
PredictorReport train_predictors_stage(const RunConfig& config);
PredictorBundle load_predictors(const RunConfig& config);
/// Stable JSON rendering of a predictor report (no timings).
std::string predictor_report_json(const PredictorReport& report);
/// Human-readable summary: accuracy, per-class P/R/F1, confusion matrix,
/// trajectory and RSRP errors, stage timings.
void print_predictor_report(std::ostream& out, const PredictorReport& report);

/// Trains the rApp policy on the simulator and writes the checkpoint and
/// the reward curve. `progress` (optional) gets one line per 10 episodes.
PolicyTrainResult train_policy_stage(const RunConfig& config, std::ostream* progress = nullptr);
PolicyCheckpoint load_policy_checkpoint(const RunConfig& config);

struct SimulateOutput {
  SimResult result;
  std::filesystem::path directory;
};

/// One recorded run: ticks.csv, events.csv, kpi.json, messages.jsonl.
SimulateOutput simulate_stage(const RunConfig& config, ControllerKind kind, std::uint64_t seed);

/// Runs the campaign and writes summary.csv, runs.csv and plot_<kpi>.csv.
/// Checks every checkpoint the listed controllers need up front.
CampaignResult compare_stage(const RunConfig& config, std::span<const ControllerKind> controllers);

/// Files the listed controllers need that do not exist yet.
std::vector<std::filesystem::path> missing_artifacts(const RunConfig& config,
                                                     std::span<const ControllerKind> controllers);

}  // namespace ahc
