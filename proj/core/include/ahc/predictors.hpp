#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ahc/forest.hpp"
#include "ahc/knn.hpp"
#include "ahc/metrics.hpp"
#include "ahc/mobility.hpp"
#include "ahc/radio.hpp"

namespace ahc {

struct PredictorConfig {
  bool operator==(const PredictorConfig&) const = default;

  int knn_k = 5;
  int window = 10;
  /// Distance weight of the previous-mode column after z-scoring; the
  /// kinematic columns have weight 1.
  double previous_mode_weight = 0.25;
  ForestParams trajectory_forest{};
  ForestParams rsrp_forest{};
  double test_fraction = 0.2;
  /// Training-set cap for the k-NN (0 = no cap); rows beyond it are dropped
  /// with a deterministic stride so every trace stays represented.
  std::size_t knn_max_train = 20000;
};

/// k-NN over windowed kinematic summaries plus the previous mode.
struct ModeClassifier {
  KnnClassifier knn;
  int window = 10;

  MobilityMode classify(std::span<const Kinematics> window_kin, MobilityMode previous) const;
};

/// Forest over [v, a, mode, x, y, vx, vy] predicting the next displacement;
/// the absolute next position is the current one plus that displacement.
struct TrajectoryPredictor {
  ForestModel forest;
  double tick_s = 0.1;

  Vec2 predict(const TraceSample& previous, const TraceSample& current, MobilityMode mode) const;
};

/// Multi-output forest over [v, a, x, y, mode] predicting the next-tick RSRP
/// of every cell.
struct RsrpPredictor {
  ForestModel forest;

  RsrpVector predict(const TraceSample& current, MobilityMode mode) const;
};

struct PredictorBundle {
  ModeClassifier classifier;
  TrajectoryPredictor trajectory;
  RsrpPredictor rsrp;

  /// Writes classifier.bin, trajectory.bin and rsrp.bin into `dir`.
  void save(const std::filesystem::path& dir) const;
  /// Throws std::runtime_error if a file is missing or corrupt.
  static PredictorBundle load(const std::filesystem::path& dir);
  static bool exists(const std::filesystem::path& dir);
};

struct PredictorReport {
  ClassificationReport classification;
  double self_feedback_accuracy = 0.0;  // previous mode fed back from own output, seeded with PED
  RegressionReport trajectory;
  RegressionReport trajectory_persistence;
  RegressionReport rsrp;
  std::size_t train_traces = 0;
  std::size_t test_traces = 0;
  std::size_t classifier_train_rows = 0;
  std::size_t classifier_test_rows = 0;
  std::size_t skipped_traces = 0;
  // Wall-clock seconds per stage (dataset build, fit, evaluation).
  double classifier_seconds = 0.0;
  double trajectory_seconds = 0.0;
  double rsrp_seconds = 0.0;
};

struct TrainedPredictors {
  PredictorBundle bundle;
  PredictorReport report;
};

/// Trains the three models on an 80/20 by-trace split and evaluates each on
/// the held-out traces. Deterministic given `seed`.
TrainedPredictors train_predictors(std::span<const Trace> traces, const Topology& topology,
                                   const PredictorConfig& config, double tick_s, std::uint64_t seed);

}  // namespace ahc
