#pragma once

#include <array>
#include <span>
#include <vector>

#include "ahc/mobility.hpp"
#include "ahc/radio.hpp"
#include "ahc/rng.hpp"
#include "ahc/table.hpp"

namespace ahc {

inline constexpr std::size_t kClassifierFeatures = 9;
inline constexpr std::size_t kTrajectoryFeatures = 7;
inline constexpr std::size_t kRsrpFeatures = 5;

/// [mean v, std v, mean a, std a, mean j, std j, mean psi_dot, std psi_dot]
/// with population standard deviations.
std::array<double, 8> window_summary(std::span<const Kinematics> window);

/// Window summary followed by the previous-mode index.
std::vector<double> classifier_features(std::span<const Kinematics> window, MobilityMode previous);

/// [v, a, mode, x, y, vx, vy]; the velocity components come from the last
/// observed displacement.
std::vector<double> trajectory_features(const TraceSample& previous, const TraceSample& current,
                                        MobilityMode mode, double tick_s);

/// [v, a, x, y, mode]
std::vector<double> rsrp_features(const TraceSample& current, MobilityMode mode);

struct ClassifierDataset {
  Table features{kClassifierFeatures};
  std::vector<MobilityMode> labels;
  std::vector<std::size_t> trace_index;  // index into the input trace list
  std::size_t skipped_traces = 0;
};

/// Sliding windows (stride 1) of `window` ticks ending at tick e for every
/// e in [window, n-1]; the previous-mode feature is the true label at the
/// window start. Traces shorter than window+1 are skipped and counted.
ClassifierDataset build_classifier_dataset(std::span<const Trace> traces, int window);

struct RegressionDataset {
  Table features;
  Table targets;
  Table anchors{2};  // current position; trajectory targets are displacements from it
  std::vector<std::size_t> trace_index;
};

/// One sample per tick t in [1, n-2]: features at t, target p(t+1) - p(t).
RegressionDataset build_trajectory_dataset(std::span<const Trace> traces, double tick_s);

/// RSRP (with correlated shadowing) along a trace.
std::vector<RsrpVector> trace_rsrp(const Topology& topology, const Trace& trace, RandomStream& stream);

/// One sample per tick t in [0, n-2]: features at t, target RSRP vector at t+1.
/// Shadowing for trace i comes from stream.split(i).
RegressionDataset build_rsrp_dataset(std::span<const Trace> traces, const Topology& topology,
                                     const RandomStream& stream);

/// Marks whole traces as held out; round(test_fraction * n) of them, chosen
/// by a seeded shuffle.
std::vector<bool> split_by_trace(std::size_t n_traces, double test_fraction, RandomStream& stream);

/// Row indices of `trace_index` whose trace is (or is not) held out.
std::vector<std::size_t> rows_where(std::span<const std::size_t> trace_index,
                                    const std::vector<bool>& is_test, bool want_test);

}  // namespace ahc
