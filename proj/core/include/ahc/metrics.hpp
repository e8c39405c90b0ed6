#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "ahc/mobility.hpp"
#include "ahc/table.hpp"

namespace ahc {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int support = 0;
};

struct ClassificationReport {
  double accuracy = 0.0;
  std::array<ClassMetrics, kModeCount> per_class{};
  /// confusion[true][predicted]
  std::array<std::array<int, kModeCount>, kModeCount> confusion{};
  int total = 0;
};

/// Throws std::invalid_argument on empty or unequal-length input. Undefined
/// precision/recall (zero denominator) and F1 with P+R = 0 are reported as 0.
ClassificationReport eval_classification(std::span<const MobilityMode> predicted,
                                         std::span<const MobilityMode> truth);

struct RegressionReport {
  double rmse = 0.0;
  double mean_bias = 0.0;  // mean(pred - target) over all entries
  double mean_prediction = 0.0;
  double mean_target = 0.0;
  std::vector<double> mae_per_dim;
  /// Pearson correlation; nullopt where either side is constant.
  std::vector<std::optional<double>> pearson_per_dim;
  std::size_t count = 0;
};

/// Throws std::invalid_argument on shape mismatch or empty input.
RegressionReport eval_regression(const Table& predicted, const Table& target);

}  // namespace ahc
