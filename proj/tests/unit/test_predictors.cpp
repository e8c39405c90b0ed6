#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "ahc/datasets.hpp"
#include "ahc/forest.hpp"
#include "ahc/knn.hpp"
#include "ahc/metrics.hpp"
#include "ahc/predictors.hpp"
#include "oracles.hpp"

using namespace ahc;

namespace {

Table table_of(const std::vector<std::vector<double>>& rows) {
  Table t(rows.front().size());
  for (const auto& r : rows) t.push_back(r);
  return t;
}

}  // namespace

TEST_CASE("normalizer round-trips") {
  RandomStream s(1);
  Table t(3);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> r{s.normal() * 100.0, s.uniform(), 7.0};
    t.push_back(r);
  }
  const Normalizer n = Normalizer::fit(t);
  CHECK(n.stddev[2] == 1.0);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const auto back = n.denormalize(n.normalize(t.row(r)));
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(back[c] - t(r, c)) <= 1e-9);
  }
}

TEST_CASE("knn basic votes") {
  const auto X = table_of({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {5.0, 5.0}, {6.0, 5.0}});
  const std::vector<MobilityMode> y{MobilityMode::kPed, MobilityMode::kPed, MobilityMode::kCar, MobilityMode::kBus,
                                    MobilityMode::kBus};
  const KnnClassifier k1(X, y, 1);
  for (std::size_t r = 0; r < X.rows(); ++r) CHECK(k1.classify(X.row(r)) == y[r]);

  const KnnClassifier k3(X, y, 3);
  const std::vector<double> q{0.2, 0.2};
  CHECK(k3.classify(q) == MobilityMode::kPed);

  CHECK_THROWS_AS(KnnClassifier(Table(2), {}, 1), std::invalid_argument);
  CHECK_THROWS_AS(KnnClassifier(X, y, 6), std::invalid_argument);
  CHECK_THROWS_AS(KnnClassifier(X, y, 0), std::invalid_argument);
}

TEST_CASE("knn vote tie rules") {
  const std::vector<MobilityMode> labels{MobilityMode::kCar, MobilityMode::kPed, MobilityMode::kCar,
                                         MobilityMode::kPed};
  // 2-2 split: PED closer on average
  std::vector<Neighbor> n{{0, 1.0}, {1, 0.5}, {2, 1.0}, {3, 0.6}};
  CHECK(vote(n, labels) == MobilityMode::kPed);
  // 2-2 split with equal mean distance: lower mode index
  n = {{0, 1.0}, {1, 1.0}, {2, 1.0}, {3, 1.0}};
  CHECK(vote(n, labels) == MobilityMode::kPed);
  n = {{0, 0.1}, {1, 0.2}, {2, 0.3}};
  CHECK(vote(n, labels) == MobilityMode::kCar);
}

TEST_CASE("knn matches the exhaustive-scan oracle on 100 queries") {
  RandomStream s(2024);
  std::vector<std::vector<double>> rows;
  std::vector<MobilityMode> y;
  for (int i = 0; i < 500; ++i) {
    const bool b = s.uniform() < 0.5;
    rows.push_back({s.normal() + (b ? 1.0 : 0.0), 10.0 * s.normal() + (b ? 5.0 : 0.0), s.uniform()});
    y.push_back(b ? MobilityMode::kBus : MobilityMode::kCar);
  }
  for (int k : {1, 4, 5, 9}) {
    const KnnClassifier knn(table_of(rows), y, k);
    for (int i = 0; i < 100; ++i) {
      const std::vector<double> q{s.normal() + 0.5, 10.0 * s.normal() + 2.5, s.uniform()};
      CHECK(knn.classify(q) == oracle::knn_classify(rows, y, k, q));
    }
  }
}

TEST_CASE("knn checkpoint round-trips") {
  RandomStream s(8);
  Table X(4);
  std::vector<MobilityMode> y;
  for (int i = 0; i < 60; ++i) {
    const std::vector<double> r{s.normal(), s.normal(), s.normal(), s.normal()};
    X.push_back(r);
    y.push_back(mode_from_index(i % kModeCount));
  }
  const KnnClassifier knn(X, y, 3, {1.0, 1.0, 0.5, 2.0});
  std::stringstream ss;
  knn.save(ss);
  const KnnClassifier back = KnnClassifier::load(ss);
  for (int i = 0; i < 30; ++i) {
    const std::vector<double> q{s.normal(), s.normal(), s.normal(), s.normal()};
    CHECK(back.classify(q) == knn.classify(q));
  }
}

TEST_CASE("forest on a constant target predicts the constant") {
  RandomStream s(3);
  Table X(2), Y(1);
  for (int i = 0; i < 40; ++i) {
    const std::vector<double> x{s.normal(), s.normal()};
    const double c = 4.25;
    X.push_back(x);
    Y.push_back(std::span<const double>(&c, 1));
  }
  RandomStream fs(1);
  const ForestModel m = ForestModel::train(X, Y, ForestParams{.n_trees = 5}, fs);
  for (int i = 0; i < 10; ++i) {
    const std::vector<double> q{s.normal(), s.normal()};
    CHECK(m.predict(q)[0] == doctest::Approx(4.25));
  }
}

TEST_CASE("forest split on the 4-point fixture matches exhaustive search") {
  const std::vector<double> xs{0, 1, 2, 3}, ys{0, 0, 10, 10};
  // Oracle: SSE for every midpoint threshold.
  double best_t = 0.0, best_sse = 1e300;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double t = 0.5 * (xs[i] + xs[i + 1]);
    double sse = 0.0;
    for (bool left : {true, false}) {
      double sum = 0.0;
      int n = 0;
      for (std::size_t j = 0; j < xs.size(); ++j)
        if ((xs[j] <= t) == left) {
          sum += ys[j];
          ++n;
        }
      for (std::size_t j = 0; j < xs.size(); ++j)
        if ((xs[j] <= t) == left) sse += (ys[j] - sum / n) * (ys[j] - sum / n);
    }
    if (sse < best_sse) {
      best_sse = sse;
      best_t = t;
    }
  }
  REQUIRE(best_t == 1.5);

  Table X(1), Y(1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    X.push_back(std::span<const double>(&xs[i], 1));
    Y.push_back(std::span<const double>(&ys[i], 1));
  }
  RandomStream fs(9);
  const ForestParams p{.n_trees = 1, .max_depth = 1, .min_leaf = 1, .bootstrap = false, .max_features = 1};
  const ForestModel m = ForestModel::train(X, Y, p, fs);
  REQUIRE(m.trees().size() == 1);
  const TreeNode& root = m.trees()[0].nodes[0];
  REQUIRE(root.feature == 0);
  const double threshold = root.threshold * m.feature_normalizer().stddev[0] + m.feature_normalizer().mean[0];
  CHECK(threshold > 1.0);
  CHECK(threshold < 2.0);
  CHECK(threshold == doctest::Approx(best_t));
  CHECK(m.predict(std::vector<double>{0.0})[0] == doctest::Approx(0.0));
  CHECK(m.predict(std::vector<double>{1.0})[0] == doctest::Approx(0.0));
  CHECK(m.predict(std::vector<double>{2.0})[0] == doctest::Approx(10.0));
  CHECK(m.predict(std::vector<double>{3.0})[0] == doctest::Approx(10.0));
  CHECK(m.trees()[0].depth <= 1);
}

TEST_CASE("forest averages trees and denormalizes") {
  auto leaf_tree = [](double v) {
    DecisionTree t;
    t.nodes.push_back(TreeNode{0.0, -1, -1, -1, 0});
    t.leaf_values = {v};
    return t;
  };
  const ForestModel m({leaf_tree(4.0), leaf_tree(6.0)}, Normalizer::identity(2), Normalizer::identity(1),
                      ForestParams{});
  CHECK(m.predict(std::vector<double>{1.0, 2.0})[0] == doctest::Approx(5.0));
  CHECK_THROWS_AS(m.predict(std::vector<double>{1.0}), std::invalid_argument);

  const ForestModel scaled({leaf_tree(1.0)}, Normalizer::identity(2), Normalizer{{10.0}, {2.0}}, ForestParams{});
  CHECK(scaled.predict(std::vector<double>{0.0, 0.0})[0] == doctest::Approx(12.0));
}

TEST_CASE("single-leaf forest predicts the global mean") {
  Table X(1), Y(1);
  double sum = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double x = 1.0, y = i * i;
    sum += y;
    X.push_back(std::span<const double>(&x, 1));
    Y.push_back(std::span<const double>(&y, 1));
  }
  RandomStream fs(4);
  const ForestModel m = ForestModel::train(X, Y, ForestParams{.n_trees = 3, .bootstrap = false}, fs);
  CHECK(m.predict(std::vector<double>{1.0})[0] == doctest::Approx(sum / 10.0));
  for (const auto& t : m.trees()) CHECK(t.nodes.size() == 1);
}

TEST_CASE("forest predictions match a hand walk of every tree") {
  RandomStream s(12);
  Table X(3), Y(2);
  for (int i = 0; i < 300; ++i) {
    const std::vector<double> x{s.normal(), s.uniform(-5, 5), s.normal() * 3};
    const std::vector<double> y{x[0] * x[1] + s.normal() * 0.1, std::sin(x[2])};
    X.push_back(x);
    Y.push_back(y);
  }
  RandomStream fs(5);
  const ForestModel m = ForestModel::train(X, Y, ForestParams{.n_trees = 7, .max_depth = 6}, fs);
  const Normalizer& fn = m.feature_normalizer();
  const Normalizer& tn = m.target_normalizer();
  for (int f = 0; f < 10; ++f) {
    const std::vector<double> q{s.normal(), s.uniform(-5, 5), s.normal() * 3};
    std::vector<double> z(3);
    for (std::size_t c = 0; c < 3; ++c) z[c] = (q[c] - fn.mean[c]) / fn.stddev[c];
    std::vector<double> acc(2, 0.0);
    for (const auto& tree : m.trees()) {
      std::size_t i = 0;
      int depth = 0;
      while (tree.nodes[i].feature >= 0) {
        const TreeNode& n = tree.nodes[i];
        i = static_cast<std::size_t>(z[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
        ++depth;
      }
      CHECK(depth <= 6);
      for (std::size_t o = 0; o < 2; ++o)
        acc[o] += tree.leaf_values[static_cast<std::size_t>(tree.nodes[i].value_offset) + o];
    }
    const auto pred = m.predict(q);
    for (std::size_t o = 0; o < 2; ++o) {
      const double oracle = acc[o] / static_cast<double>(m.trees().size()) * tn.stddev[o] + tn.mean[o];
      CHECK(pred[o] == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("forest training is deterministic, save/load exact, in-bag loss monotone in depth") {
  RandomStream s(21);
  Table X(2), Y(1);
  for (int i = 0; i < 400; ++i) {
    const std::vector<double> x{s.uniform(-3, 3), s.uniform(-3, 3)};
    const double y = std::sin(x[0]) + 0.3 * x[1] * x[1] + 0.1 * s.normal();
    X.push_back(x);
    Y.push_back(std::span<const double>(&y, 1));
  }
  auto fit = [&](int depth) {
    RandomStream fs(77);
    return ForestModel::train(X, Y, ForestParams{.n_trees = 8, .max_depth = depth}, fs);
  };
  const ForestModel a = fit(8), b = fit(8);
  REQUIRE(a.trees().size() == b.trees().size());
  for (std::size_t t = 0; t < a.trees().size(); ++t) {
    REQUIRE(a.trees()[t].nodes.size() == b.trees()[t].nodes.size());
    for (std::size_t i = 0; i < a.trees()[t].nodes.size(); ++i) {
      CHECK(a.trees()[t].nodes[i].feature == b.trees()[t].nodes[i].feature);
      CHECK(a.trees()[t].nodes[i].threshold == b.trees()[t].nodes[i].threshold);
    }
  }

  std::stringstream ss;
  a.save(ss);
  const ForestModel c = ForestModel::load(ss);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> q{s.uniform(-3, 3), s.uniform(-3, 3)};
    CHECK(c.predict(q) == a.predict(q));
  }

  double prev = 1e300;
  for (int depth = 1; depth <= 12; ++depth) {
    const double loss = fit(depth).in_bag_rmse();
    CHECK(loss <= prev + 1e-12);
    prev = loss;
  }

  std::stringstream bad("not a forest");
  CHECK_THROWS(ForestModel::load(bad));
}

TEST_CASE("classification metrics") {
  using M = MobilityMode;
  const std::vector<M> y{M::kPed, M::kCar, M::kBus, M::kPed};
  const auto same = eval_classification(y, y);
  CHECK(same.accuracy == 1.0);
  for (int c : {0, 2, 3}) CHECK(same.per_class[static_cast<std::size_t>(c)].f1 == 1.0);
  CHECK(same.confusion[0][0] == 2);

  const std::vector<M> t3{M::kPed, M::kCar, M::kBus}, p3{M::kPed, M::kCar, M::kCar};
  CHECK(eval_classification(p3, t3).accuracy == doctest::Approx(2.0 / 3.0));

  // 10-sample tally by hand:
  //   true    P P P C C C C B B T
  //   pred    P P C C C B C B P T
  // PED: tp 2, fp 1 (B->P), fn 1 -> P 2/3, R 2/3
  // CAR: tp 3, fp 1 (P->C), fn 1 -> P 3/4, R 3/4
  // BUS: tp 1, fp 1 (C->B), fn 1 -> P 1/2, R 1/2
  // TRAIN: tp 1 -> 1, 1
  const std::vector<M> truth{M::kPed, M::kPed, M::kPed, M::kCar, M::kCar, M::kCar, M::kCar, M::kBus, M::kBus, M::kTrain};
  const std::vector<M> pred{M::kPed, M::kPed, M::kCar, M::kCar, M::kCar, M::kBus, M::kCar, M::kBus, M::kPed, M::kTrain};
  const auto r = eval_classification(pred, truth);
  CHECK(r.accuracy == doctest::Approx(0.7));
  CHECK(r.total == 10);
  CHECK(r.per_class[0].precision == doctest::Approx(2.0 / 3));
  CHECK(r.per_class[0].recall == doctest::Approx(2.0 / 3));
  CHECK(r.per_class[2].precision == doctest::Approx(0.75));
  CHECK(r.per_class[2].recall == doctest::Approx(0.75));
  CHECK(r.per_class[2].f1 == doctest::Approx(0.75));
  CHECK(r.per_class[3].f1 == doctest::Approx(0.5));
  CHECK(r.per_class[4].f1 == doctest::Approx(1.0));
  CHECK(r.per_class[5].f1 == 0.0);
  CHECK(r.per_class[2].support == 4);
  CHECK(r.confusion[3][0] == 1);
  CHECK(r.confusion[2][3] == 1);
  int sum = 0;
  for (const auto& row : r.confusion) sum += std::accumulate(row.begin(), row.end(), 0);
  CHECK(sum == 10);

  CHECK_THROWS_AS(eval_classification(std::vector<M>{}, std::vector<M>{}), std::invalid_argument);
  CHECK_THROWS_AS(eval_classification(p3, y), std::invalid_argument);
}

TEST_CASE("regression metrics") {
  const auto T = table_of({{1.0, 5.0}, {2.0, 3.0}, {4.0, 8.0}, {8.0, 1.0}, {16.0, 0.0}});
  const auto same = eval_regression(T, T);
  CHECK(same.rmse == 0.0);
  CHECK(*same.pearson_per_dim[0] == doctest::Approx(1.0));

  Table shifted = T;
  for (std::size_t r = 0; r < shifted.rows(); ++r)
    for (std::size_t c = 0; c < 2; ++c) shifted(r, c) += 3.0;
  const auto off = eval_regression(shifted, T);
  CHECK(off.rmse == doctest::Approx(3.0));
  CHECK(off.mae_per_dim[0] == doctest::Approx(3.0));
  CHECK(off.mean_bias == doctest::Approx(3.0));
  CHECK(*off.pearson_per_dim[1] == doctest::Approx(1.0));

  // 5-point, 1-D fixture: errors {1,-1,2,0,-2}
  const auto t1 = table_of({{1.0}, {2.0}, {3.0}, {4.0}, {5.0}});
  const auto p1 = table_of({{2.0}, {1.0}, {5.0}, {4.0}, {3.0}});
  const auto r = eval_regression(p1, t1);
  CHECK(std::abs(r.rmse - std::sqrt(10.0 / 5.0)) <= 1e-12);
  CHECK(std::abs(r.mae_per_dim[0] - 6.0 / 5.0) <= 1e-12);
  CHECK(std::abs(r.mean_bias - 0.0) <= 1e-12);
  // cov = (-2*-1 + -1*-2 + 0*2 + 1*1 + 2*0)/5 = 1, var_t = var_p = 2 -> 0.5
  CHECK(std::abs(*r.pearson_per_dim[0] - 0.5) <= 1e-12);

  const auto flat = table_of({{1.0}, {1.0}, {1.0}});
  const auto varied = table_of({{1.0}, {2.0}, {3.0}});
  const auto u = eval_regression(varied, flat);
  CHECK_FALSE(u.pearson_per_dim[0].has_value());

  CHECK_THROWS_AS(eval_regression(T, t1), std::invalid_argument);
}

TEST_CASE("classifier dataset windows") {
  PopulationConfig cfg;
  cfg.n_ues = 1;
  auto traces = generate_population(cfg, 3);
  REQUIRE(traces[0].samples.size() == 200);
  auto ds = build_classifier_dataset(traces, 10);
  CHECK(ds.labels.size() == 190);
  CHECK(ds.features.cols() == 9);
  CHECK(ds.skipped_traces == 0);
  CHECK(ds.features(0, 8) == mode_index(traces[0].mode));

  Trace line;
  for (int t = 0; t < 30; ++t)
    line.samples.push_back(TraceSample{t, {2.0 * t, 0.0}, Kinematics{20.0, 0.0, 0.0, 0.0}, MobilityMode::kCar});
  const auto flat = build_classifier_dataset(std::vector<Trace>{line}, 10);
  for (std::size_t r = 0; r < flat.features.rows(); ++r)
    for (std::size_t c : {1, 3, 5, 7}) CHECK(flat.features(r, c) == 0.0);

  Trace a = traces[0], b = traces[0];
  a.samples.resize(50);
  b.samples.resize(5);
  const auto mixed = build_classifier_dataset(std::vector<Trace>{a, b}, 10);
  CHECK(mixed.labels.size() == 40);
  CHECK(mixed.skipped_traces == 1);
}

TEST_CASE("regression dataset shapes") {
  PopulationConfig cfg;
  cfg.n_ues = 3;
  cfg.n_ticks = 20;
  const auto traces = generate_population(cfg, 4);
  const auto traj = build_trajectory_dataset(traces, 0.1);
  CHECK(traj.features.cols() == kTrajectoryFeatures);
  CHECK(traj.targets.cols() == 2);
  CHECK(traj.features.rows() == 3 * 18);
  // target is the next displacement
  CHECK(traj.targets(0, 0) == doctest::Approx(traces[0].samples[2].position.x - traces[0].samples[1].position.x));

  const Topology topo = build_ring_topology(27, 1000, 500, 46);
  const auto rs = build_rsrp_dataset(traces, topo, RandomStream(1));
  CHECK(rs.features.cols() == kRsrpFeatures);
  CHECK(rs.targets.cols() == 27);
  CHECK(rs.features.rows() == 3 * 19);
}

TEST_CASE("by-trace split never shares a trace between train and test") {
  RandomStream s(6);
  const auto is_test = split_by_trace(10, 0.2, s);
  CHECK(std::count(is_test.begin(), is_test.end(), true) == 2);
  const std::vector<std::size_t> idx{0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 9};
  const auto tr = rows_where(idx, is_test, false);
  const auto te = rows_where(idx, is_test, true);
  CHECK(tr.size() + te.size() == idx.size());
  for (auto r : tr) CHECK_FALSE(is_test[idx[r]]);
  for (auto r : te) CHECK(is_test[idx[r]]);
}

TEST_CASE("small predictor training run") {
  PopulationConfig cfg;
  cfg.n_ues = 21;
  cfg.n_ticks = 60;
  auto traces = generate_population(cfg, 10);
  auto more = generate_population(cfg, 11);
  for (auto& t : more) {
    t.ue_id += 21;
    traces.push_back(t);
  }
  PredictorConfig pc;
  pc.trajectory_forest.n_trees = 5;
  pc.rsrp_forest.n_trees = 5;
  pc.rsrp_forest.max_depth = 6;
  const Topology topo = build_ring_topology(27, 1000, 500, 46);
  const auto a = train_predictors(traces, topo, pc, 0.1, 3);
  const auto& rep = a.report;
  int sum = 0;
  for (const auto& row : rep.classification.confusion) sum += std::accumulate(row.begin(), row.end(), 0);
  CHECK(sum == static_cast<int>(rep.classifier_test_rows));
  CHECK(rep.classification.total == sum);
  CHECK(rep.test_traces == 8);
  CHECK(rep.train_traces == 34);
  CHECK(rep.trajectory.rmse < rep.trajectory_persistence.rmse);

  const auto b = train_predictors(traces, topo, pc, 0.1, 3);
  CHECK(b.report.classification.accuracy == rep.classification.accuracy);
  CHECK(b.report.rsrp.rmse == rep.rsrp.rmse);

  const auto dir = std::filesystem::temp_directory_path() / "ahc_unit_predictors";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  a.bundle.save(dir);
  CHECK(PredictorBundle::exists(dir));
  const auto back = PredictorBundle::load(dir);
  const auto& tr = traces[0].samples;
  CHECK(back.rsrp.predict(tr[5], traces[0].mode) == a.bundle.rsrp.predict(tr[5], traces[0].mode));
  CHECK(back.trajectory.predict(tr[4], tr[5], traces[0].mode) == a.bundle.trajectory.predict(tr[4], tr[5], traces[0].mode));
  std::vector<Kinematics> w;
  for (int i = 0; i < 10; ++i) w.push_back(tr[static_cast<std::size_t>(i)].kin);
  CHECK(back.classifier.classify(w, MobilityMode::kPed) == a.bundle.classifier.classify(w, MobilityMode::kPed));
  std::filesystem::remove(dir / "rsrp.bin");
  CHECK_FALSE(PredictorBundle::exists(dir));
  CHECK_THROWS(PredictorBundle::load(dir));
  std::filesystem::remove_all(dir);
}
