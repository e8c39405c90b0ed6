#include "ahc/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ahc {

std::array<double, 8> window_summary(std::span<const Kinematics> window) {
  if (window.empty()) throw std::invalid_argument("empty kinematic window");
  const double n = static_cast<double>(window.size());
  std::array<double, 4> mean{}, sq{};
  for (const auto& k : window) {
    const std::array<double, 4> v{k.speed, k.accel, k.jerk, k.bearing_rate};
    for (int i = 0; i < 4; ++i) mean[i] += v[i];
  }
  for (auto& m : mean) m /= n;
  for (const auto& k : window) {
    const std::array<double, 4> v{k.speed, k.accel, k.jerk, k.bearing_rate};
    for (int i = 0; i < 4; ++i) sq[i] += (v[i] - mean[i]) * (v[i] - mean[i]);
  }
  std::array<double, 8> out{};
  for (int i = 0; i < 4; ++i) {
    out[2 * i] = mean[i];
    out[2 * i + 1] = std::sqrt(sq[i] / n);
  }
  return out;
}

std::vector<double> classifier_features(std::span<const Kinematics> window, MobilityMode previous) {
  const auto s = window_summary(window);
  std::vector<double> f(s.begin(), s.end());
  f.push_back(static_cast<double>(mode_index(previous)));
  return f;
}

std::vector<double> trajectory_features(const TraceSample& previous, const TraceSample& current,
                                        MobilityMode mode, double tick_s) {
  const Vec2 vel = (1.0 / tick_s) * (current.position - previous.position);
  return {current.kin.speed, current.kin.accel, static_cast<double>(mode_index(mode)),
          current.position.x, current.position.y, vel.x, vel.y};
}

std::vector<double> rsrp_features(const TraceSample& current, MobilityMode mode) {
  return {current.kin.speed, current.kin.accel, current.position.x, current.position.y,
          static_cast<double>(mode_index(mode))};
}

ClassifierDataset build_classifier_dataset(std::span<const Trace> traces, int window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  ClassifierDataset ds;
  std::vector<Kinematics> kin;
  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    const auto& samples = traces[ti].samples;
    if (samples.size() < static_cast<std::size_t>(window) + 1) {
      ++ds.skipped_traces;
      continue;
    }
    kin.resize(samples.size());
    std::transform(samples.begin(), samples.end(), kin.begin(), [](const TraceSample& s) { return s.kin; });
    for (std::size_t end = static_cast<std::size_t>(window); end < samples.size(); ++end) {
      const std::size_t start = end - static_cast<std::size_t>(window);
      const std::span<const Kinematics> w(kin.data() + start + 1, static_cast<std::size_t>(window));
      ds.features.push_back(classifier_features(w, samples[start].mode));
      ds.labels.push_back(samples[end].mode);
      ds.trace_index.push_back(ti);
    }
  }
  return ds;
}

RegressionDataset build_trajectory_dataset(std::span<const Trace> traces, double tick_s) {
  RegressionDataset ds{Table(kTrajectoryFeatures), Table(2), Table(2), {}};
  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    const auto& s = traces[ti].samples;
    for (std::size_t t = 1; t + 1 < s.size(); ++t) {
      ds.features.push_back(trajectory_features(s[t - 1], s[t], s[t].mode, tick_s));
      const Vec2 d = s[t + 1].position - s[t].position;
      const double target[2] = {d.x, d.y};
      const double anchor[2] = {s[t].position.x, s[t].position.y};
      ds.targets.push_back(target);
      ds.anchors.push_back(anchor);
      ds.trace_index.push_back(ti);
    }
  }
  return ds;
}

std::vector<RsrpVector> trace_rsrp(const Topology& topology, const Trace& trace, RandomStream& stream) {
  std::vector<RsrpVector> out;
  out.reserve(trace.samples.size());
  ShadowingProcess shadow(stream, topology.shadowing_sigma_db, topology.size(),
                          topology.shadowing_decorrelation_m);
  for (std::size_t t = 0; t < trace.samples.size(); ++t) {
    if (t > 0) shadow.advance(stream, distance(trace.samples[t].position, trace.samples[t - 1].position));
    out.push_back(rsrp(topology, trace.samples[t].position, shadow.values()));
  }
  return out;
}

RegressionDataset build_rsrp_dataset(std::span<const Trace> traces, const Topology& topology,
                                     const RandomStream& stream) {
  RegressionDataset ds{Table(kRsrpFeatures), Table(topology.size()), Table(2), {}};
  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    RandomStream trace_stream = stream.split(ti);
    const auto& s = traces[ti].samples;
    const auto r = trace_rsrp(topology, traces[ti], trace_stream);
    for (std::size_t t = 0; t + 1 < s.size(); ++t) {
      ds.features.push_back(rsrp_features(s[t], s[t].mode));
      ds.targets.push_back(r[t + 1]);
      const double anchor[2] = {s[t].position.x, s[t].position.y};
      ds.anchors.push_back(anchor);
      ds.trace_index.push_back(ti);
    }
  }
  return ds;
}

std::vector<bool> split_by_trace(std::size_t n_traces, double test_fraction, RandomStream& stream) {
  if (test_fraction < 0.0 || test_fraction > 1.0) throw std::invalid_argument("test_fraction must be in [0,1]");
  std::vector<std::size_t> order(n_traces);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n_traces; i > 1; --i) std::swap(order[i - 1], order[stream.index(i)]);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n_traces)));
  std::vector<bool> is_test(n_traces, false);
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;
  return is_test;
}

std::vector<std::size_t> rows_where(std::span<const std::size_t> trace_index, const std::vector<bool>& is_test,
                                    bool want_test) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < trace_index.size(); ++r)
    if (is_test[trace_index[r]] == want_test) rows.push_back(r);
  return rows;
}

}  // namespace ahc
