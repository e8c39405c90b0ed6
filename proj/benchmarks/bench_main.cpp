#include <benchmark/benchmark.h>

#include "ahc/controllers.hpp"
#include "ahc/forest.hpp"
#include "ahc/knn.hpp"
#include "ahc/ppo.hpp"
#include "ahc/radio.hpp"
#include "ahc/simulation.hpp"

namespace {

using namespace ahc;

Table random_table(std::size_t rows, std::size_t cols, RandomStream& rs) {
  Table t(cols);
  std::vector<double> row(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (double& v : row) v = rs.normal();
    t.push_back(row);
  }
  return t;
}

void BM_RsrpVector(benchmark::State& state) {
  const Topology topo = build_ring_topology(27, 1000, 500, 46);
  const std::vector<double> shadow(27, 0.0);
  double x = 0.0;
  for (auto _ : state) {
    x += 0.1;
    benchmark::DoNotOptimize(rsrp(topo, {x, 100.0}, shadow));
  }
}
BENCHMARK(BM_RsrpVector);

void BM_KnnClassify(benchmark::State& state) {
  RandomStream rs(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  Table X = random_table(n, 9, rs);
  std::vector<MobilityMode> y;
  for (std::size_t i = 0; i < n; ++i) y.push_back(mode_from_index(static_cast<int>(i % kModeCount)));
  const KnnClassifier knn(X, y, 5);
  std::vector<double> q(9);
  for (auto _ : state) {
    for (double& v : q) v = rs.normal();
    benchmark::DoNotOptimize(knn.classify(q));
  }
}
BENCHMARK(BM_KnnClassify)->Arg(1000)->Arg(20000);

void BM_ForestTrain(benchmark::State& state) {
  RandomStream rs(2);
  const Table X = random_table(2000, 5, rs);
  Table Y(1);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const double v = X(r, 0) * 2.0 + X(r, 1) * X(r, 2);
    Y.push_back(std::span<const double>(&v, 1));
  }
  ForestParams p;
  p.n_trees = 10;
  p.max_depth = 8;
  for (auto _ : state) {
    RandomStream s(3);
    benchmark::DoNotOptimize(ForestModel::train(X, Y, p, s));
  }
}
BENCHMARK(BM_ForestTrain)->Unit(benchmark::kMillisecond);

void BM_PolicyForward(benchmark::State& state) {
  RandomStream rs(4);
  const PolicyNet net = PolicyNet::create(36, 27, {64, 64}, rs);
  std::vector<double> s(36);
  for (double& v : s) v = rs.normal();
  const ActionMask mask(27, true);
  for (auto _ : state) benchmark::DoNotOptimize(policy_forward(net, s, mask));
}
BENCHMARK(BM_PolicyForward);

void BM_PpoLossGradient(benchmark::State& state) {
  RandomStream rs(5);
  const PolicyNet net = PolicyNet::create(36, 27, {64, 64}, rs);
  std::vector<TrainingSample> batch(64);
  for (auto& b : batch) {
    b.state.resize(36);
    for (double& v : b.state) v = rs.normal();
    b.mask.assign(27, true);
    b.action = static_cast<int>(rs.index(27));
    b.old_log_prob = std::log(1.0 / 27);
    b.advantage = rs.normal();
    b.ret = rs.normal();
  }
  Eigen::VectorXd ga, gc;
  for (auto _ : state) benchmark::DoNotOptimize(ppo_loss(net, batch, PpoConfig{}, &ga, &gc));
}
BENCHMARK(BM_PpoLossGradient)->Unit(benchmark::kMicrosecond);

void BM_A3Decide(benchmark::State& state) {
  RandomStream rs(6);
  A3Config cfg;
  A3TimerState timers(27);
  std::vector<double> r(27);
  for (auto _ : state) {
    for (double& v : r) v = -90.0 + 5.0 * rs.normal();
    benchmark::DoNotOptimize(a3_decide(cfg, timers, 0, r));
  }
}
BENCHMARK(BM_A3Decide);

void BM_SimulationA3(benchmark::State& state) {
  SimParams p;
  p.topology = build_ring_topology(27, 1000, 500, 46);
  p.population.n_ues = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(p, ControllerKind::kA3, 1, SimModels{}));
}
BENCHMARK(BM_SimulationA3)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
