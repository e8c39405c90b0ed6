#include "ahc/predictors.hpp"

#include <chrono>
#include <fstream>
#include <stdexcept>

#include "ahc/binary_io.hpp"
#include "ahc/datasets.hpp"

namespace ahc {

namespace fs = std::filesystem;

MobilityMode ModeClassifier::classify(std::span<const Kinematics> window_kin, MobilityMode previous) const {
  return knn.classify(classifier_features(window_kin, previous));
}

Vec2 TrajectoryPredictor::predict(const TraceSample& previous, const TraceSample& current,
                                  MobilityMode mode) const {
  const auto d = forest.predict(trajectory_features(previous, current, mode, tick_s));
  return current.position + Vec2{d[0], d[1]};
}

RsrpVector RsrpPredictor::predict(const TraceSample& current, MobilityMode mode) const {
  return forest.predict(rsrp_features(current, mode));
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("missing model file " + p.string());
  return in;
}

}  // namespace

void PredictorBundle::save(const fs::path& dir) const {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "classifier.bin");
    binio::put_magic(out, "AHCMC", 1);
    binio::put<std::int32_t>(out, classifier.window);
    classifier.knn.save(out);
  }
  {
    auto out = open_out(dir / "trajectory.bin");
    binio::put<double>(out, trajectory.tick_s);
    trajectory.forest.save(out);
  }
  {
    auto out = open_out(dir / "rsrp.bin");
    rsrp.forest.save(out);
  }
}

PredictorBundle PredictorBundle::load(const fs::path& dir) {
  PredictorBundle b;
  {
    auto in = open_in(dir / "classifier.bin");
    if (binio::expect_magic(in, "AHCMC") != 1) throw std::runtime_error("unsupported classifier checkpoint");
    const auto w = binio::get<std::int32_t>(in);
    if (w < 1) throw std::runtime_error("corrupt classifier checkpoint");
    b.classifier.window = w;
    b.classifier.knn = KnnClassifier::load(in);
  }
  {
    auto in = open_in(dir / "trajectory.bin");
    b.trajectory.tick_s = binio::get<double>(in);
    b.trajectory.forest = ForestModel::load(in);
  }
  {
    auto in = open_in(dir / "rsrp.bin");
    b.rsrp.forest = ForestModel::load(in);
  }
  return b;
}

bool PredictorBundle::exists(const fs::path& dir) {
  return fs::exists(dir / "classifier.bin") && fs::exists(dir / "trajectory.bin") &&
         fs::exists(dir / "rsrp.bin");
}

TrainedPredictors train_predictors(std::span<const Trace> traces, const Topology& topology,
                                   const PredictorConfig& config, double tick_s, std::uint64_t seed) {
  if (traces.size() < 2) throw std::invalid_argument("need at least two traces to train predictors");
  RandomStream root(seed);
  RandomStream split_stream = root.split(1);
  const auto is_test = split_by_trace(traces.size(), config.test_fraction, split_stream);

  TrainedPredictors result;
  auto& rep = result.report;
  for (bool t : is_test) (t ? rep.test_traces : rep.train_traces)++;

  using Clock = std::chrono::steady_clock;
  auto seconds_since = [](Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  // Mode classifier.
  auto t0 = Clock::now();
  const auto cds = build_classifier_dataset(traces, config.window);
  rep.skipped_traces = cds.skipped_traces;
  auto train_rows = rows_where(cds.trace_index, is_test, false);
  const auto test_rows = rows_where(cds.trace_index, is_test, true);
  if (config.knn_max_train > 0 && train_rows.size() > config.knn_max_train) {
    std::vector<std::size_t> kept;
    const double stride = static_cast<double>(train_rows.size()) / static_cast<double>(config.knn_max_train);
    for (std::size_t i = 0; i < config.knn_max_train; ++i)
      kept.push_back(train_rows[static_cast<std::size_t>(static_cast<double>(i) * stride)]);
    train_rows = std::move(kept);
  }
  std::vector<MobilityMode> train_labels;
  for (auto r : train_rows) train_labels.push_back(cds.labels[r]);
  std::vector<double> weights(kClassifierFeatures, 1.0);
  weights.back() = config.previous_mode_weight;
  rep.classifier_train_rows = train_rows.size();
  rep.classifier_test_rows = test_rows.size();
  result.bundle.classifier.window = config.window;
  result.bundle.classifier.knn = KnnClassifier(cds.features.select(train_rows), std::move(train_labels), config.knn_k, weights);

  if (!test_rows.empty()) {
    std::vector<MobilityMode> pred, truth;
    pred.reserve(test_rows.size());
    for (auto r : test_rows) {
      pred.push_back(result.bundle.classifier.knn.classify(cds.features.row(r)));
      truth.push_back(cds.labels[r]);
    }
    rep.classification = eval_classification(pred, truth);

    // Deployment-style evaluation: previous mode is the classifier's own output.
    std::size_t correct = 0, total = 0;
    for (std::size_t ti = 0; ti < traces.size(); ++ti) {
      if (!is_test[ti]) continue;
      const auto& s = traces[ti].samples;
      if (s.size() < static_cast<std::size_t>(config.window) + 1) continue;
      std::vector<Kinematics> kin;
      for (const auto& x : s) kin.push_back(x.kin);
      MobilityMode prev = MobilityMode::kPed;
      for (std::size_t end = static_cast<std::size_t>(config.window); end < s.size(); ++end) {
        const std::span<const Kinematics> w(kin.data() + end - static_cast<std::size_t>(config.window) + 1,
                                            static_cast<std::size_t>(config.window));
        prev = result.bundle.classifier.classify(w, prev);
        correct += prev == s[end].mode ? 1 : 0;
        ++total;
      }
    }
    rep.self_feedback_accuracy = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  }
  rep.classifier_seconds = seconds_since(t0);

  // Trajectory regressor.
  t0 = Clock::now();
  const auto tds = build_trajectory_dataset(traces, tick_s);
  {
    const auto tr = rows_where(tds.trace_index, is_test, false);
    const auto te = rows_where(tds.trace_index, is_test, true);
    RandomStream forest_stream = root.split(2);
    result.bundle.trajectory.tick_s = tick_s;
    result.bundle.trajectory.forest =
        ForestModel::train(tds.features.select(tr), tds.targets.select(tr), config.trajectory_forest, forest_stream);
    if (!te.empty()) {
      Table pred(2), truth(2), persist(2);
      for (auto r : te) {
        const auto d = result.bundle.trajectory.forest.predict(tds.features.row(r));
        const double ax = tds.anchors(r, 0), ay = tds.anchors(r, 1);
        const double p[2] = {ax + d[0], ay + d[1]};
        const double t[2] = {ax + tds.targets(r, 0), ay + tds.targets(r, 1)};
        const double q[2] = {ax, ay};
        pred.push_back(p);
        truth.push_back(t);
        persist.push_back(q);
      }
      rep.trajectory = eval_regression(pred, truth);
      rep.trajectory_persistence = eval_regression(persist, truth);
    }
  }
  rep.trajectory_seconds = seconds_since(t0);

  // Per-cell RSRP regressor.
  t0 = Clock::now();
  const auto rds = build_rsrp_dataset(traces, topology, root.split(3));
  {
    const auto tr = rows_where(rds.trace_index, is_test, false);
    const auto te = rows_where(rds.trace_index, is_test, true);
    RandomStream forest_stream = root.split(4);
    result.bundle.rsrp.forest =
        ForestModel::train(rds.features.select(tr), rds.targets.select(tr), config.rsrp_forest, forest_stream);
    if (!te.empty()) {
      Table pred(topology.size());
      for (auto r : te) pred.push_back(result.bundle.rsrp.forest.predict(rds.features.row(r)));
      rep.rsrp = eval_regression(pred, rds.targets.select(te));
    }
  }
  rep.rsrp_seconds = seconds_since(t0);
  return result;
}

}  // namespace ahc
