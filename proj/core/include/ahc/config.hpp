#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "ahc/mobility.hpp"
#include "ahc/ppo.hpp"
#include "ahc/predictors.hpp"
#include "ahc/radio.hpp"
#include "ahc/ric_bus.hpp"
#include "ahc/simulation.hpp"

namespace ahc {

inline constexpr int kConfigSchemaVersion = 1;

/// Ring deployment plus link-budget constants.
struct TopologyConfig {
  bool operator==(const TopologyConfig&) const = default;

  int n_cells = 27;
  double ring_radius_m = 1000.0;
  double coverage_radius_m = 500.0;
  double tx_power_dbm = 46.0;
  double carrier_freq_ghz = 2.1;
  double bandwidth_hz = 20e6;
  double shadowing_sigma_db = 8.0;
  double noise_figure_db = 9.0;
  double shadowing_decorrelation_m = 50.0;

  Topology build() const;
};

struct SimSection {
  bool operator==(const SimSection&) const = default;

  int pingpong_window = 10;
  double capacity_factor = 2.0;
  int l3_filter_k = 4;
  int n_runs = 10;
  std::uint64_t base_seed = 1;  // run r uses base_seed + r
  int workers = 0;              // 0 = hardware concurrency
};

struct TrainingSection {
  bool operator==(const TrainingSection&) const = default;

  int trace_files = 10;            // generate-traces writes seeds trace_seed .. trace_seed + trace_files - 1
  std::uint64_t trace_seed = 1000;
  std::uint64_t predictor_seed = 7;
  int policy_episodes = 1000;
  int policy_ues = 20;
  std::uint64_t policy_seed = 42;
};

/// Everything a pipeline command needs. The "ppo.reward" weights are also the
/// simulator's utility weights.
struct RunConfig {
  bool operator==(const RunConfig&) const = default;

  int schema_version = kConfigSchemaVersion;
  TopologyConfig topology;
  PopulationConfig mobility;
  PredictorConfig predictors;
  PpoConfig ppo;
  StateScaling scaling;
  ControllerConfig controllers;
  RappConfig rapp;
  SimSection sim;
  TrainingSection training;
  std::string output_dir = "out";

  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
  SimParams sim_params() const;
};

/// Strict JSON: unknown keys and wrong types are errors; missing keys keep
/// their defaults. The result is validated.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);
/// Pretty-printed JSON with every key present.
std::string dump_config(const RunConfig& config);

/// Applies "section.key=value" (value is JSON, or a bare string). The path
/// must name an existing leaf; the result is re-validated.
void apply_override(RunConfig& config, std::string_view assignment);

}  // namespace ahc
