#include "ahc/kpi.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ahc {

namespace {

// t_{0.975, df} for df = 1..200.
constexpr double kT975[200] = {
    12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912, 2.364624, 2.306004,
    2.262157, 2.228139, 2.200985, 2.178813, 2.160369, 2.144787, 2.131450, 2.119905,
    2.109816, 2.100922, 2.093024, 2.085963, 2.079614, 2.073873, 2.068658, 2.063899,
    2.059539, 2.055529, 2.051831, 2.048407, 2.045230, 2.042272, 2.039513, 2.036933,
    2.034515, 2.032245, 2.030108, 2.028094, 2.026192, 2.024394, 2.022691, 2.021075,
    2.019541, 2.018082, 2.016692, 2.015368, 2.014103, 2.012896, 2.011741, 2.010635,
    2.009575, 2.008559, 2.007584, 2.006647, 2.005746, 2.004879, 2.004045, 2.003241,
    2.002465, 2.001717, 2.000995, 2.000298, 1.999624, 1.998972, 1.998341, 1.997730,
    1.997138, 1.996564, 1.996008, 1.995469, 1.994945, 1.994437, 1.993943, 1.993464,
    1.992997, 1.992543, 1.992102, 1.991673, 1.991254, 1.990847, 1.990450, 1.990063,
    1.989686, 1.989319, 1.988960, 1.988610, 1.988268, 1.987934, 1.987608, 1.987290,
    1.986979, 1.986675, 1.986377, 1.986086, 1.985802, 1.985523, 1.985251, 1.984984,
    1.984723, 1.984467, 1.984217, 1.983972, 1.983731, 1.983495, 1.983264, 1.983038,
    1.982815, 1.982597, 1.982383, 1.982173, 1.981967, 1.981765, 1.981567, 1.981372,
    1.981180, 1.980992, 1.980808, 1.980626, 1.980448, 1.980272, 1.980100, 1.979930,
    1.979764, 1.979600, 1.979439, 1.979280, 1.979124, 1.978971, 1.978820, 1.978671,
    1.978524, 1.978380, 1.978239, 1.978099, 1.977961, 1.977826, 1.977692, 1.977561,
    1.977431, 1.977304, 1.977178, 1.977054, 1.976931, 1.976811, 1.976692, 1.976575,
    1.976460, 1.976346, 1.976233, 1.976122, 1.976013, 1.975905, 1.975799, 1.975694,
    1.975590, 1.975488, 1.975387, 1.975288, 1.975189, 1.975092, 1.974996, 1.974902,
    1.974808, 1.974716, 1.974625, 1.974535, 1.974446, 1.974358, 1.974271, 1.974185,
    1.974100, 1.974017, 1.973934, 1.973852, 1.973771, 1.973691, 1.973612, 1.973534,
    1.973457, 1.973381, 1.973305, 1.973231, 1.973157, 1.973084, 1.973012, 1.972941,
    1.972870, 1.972800, 1.972731, 1.972663, 1.972595, 1.972528, 1.972462, 1.972396,
    1.972332, 1.972268, 1.972204, 1.972141, 1.972079, 1.972017, 1.971957, 1.971896,
};

}  // namespace

void PingPongDetector::observe(HoEvent& e) {
  const auto u = static_cast<std::size_t>(e.ue_id);
  if (u >= last_.size()) {
    last_.resize(u + 1);
    last_tick_.resize(u + 1, std::numeric_limits<int>::min());
  }
  if (e.tick < last_tick_[u]) throw std::invalid_argument("handover events are not time-ordered per UE");
  last_tick_[u] = e.tick;
  e.pingpong = false;
  if (!e.success) return;
  if (const auto& p = last_[u])
    e.pingpong = p->from == e.to_cell && p->to == e.from_cell && e.tick - p->tick <= window_;
  last_[u] = Last{e.tick, e.from_cell, e.to_cell};
}

void detect_pingpong(std::span<HoEvent> events, int window_ticks) {
  PingPongDetector detector(window_ticks);
  for (HoEvent& e : events) detector.observe(e);
}

double episode_utility(std::span<const double> throughput_mbps, std::span<const bool> handover,
                       std::span<const bool> pingpong, const UtilityWeights& weights) {
  if (throughput_mbps.size() != handover.size() || handover.size() != pingpong.size())
    throw std::invalid_argument("utility inputs differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < throughput_mbps.size(); ++i)
    total += weights.per_tick(throughput_mbps[i], handover[i], pingpong[i]);
  return total;
}

KpiRecord kpi_from_events(std::span<const HoEvent> events, double throughput_sum_mbps, double utility, int n_ues,
                          int n_ticks) {
  if (n_ues < 1 || n_ticks < 1) throw std::invalid_argument("KPIs need at least one UE and one tick");
  KpiRecord k;
  k.n_ues = n_ues;
  k.n_ticks = n_ticks;
  const double ue_ticks = static_cast<double>(n_ues) * static_cast<double>(n_ticks);
  long long successes = 0;
  for (const HoEvent& e : events) {
    ++k.handover_attempts;
    if (e.success)
      ++successes;
    else
      ++k.handover_failures;
    if (e.pingpong) ++k.pingpongs;
  }
  k.mean_throughput_mbps = throughput_sum_mbps / ue_ticks;
  k.handover_rate = static_cast<double>(k.handover_attempts) / ue_ticks;
  k.pingpong_rate_pct = successes > 0 ? 100.0 * static_cast<double>(k.pingpongs) / static_cast<double>(successes) : 0.0;
  k.ho_failure_fraction =
      k.handover_attempts > 0 ? static_cast<double>(k.handover_failures) / static_cast<double>(k.handover_attempts) : 0.0;
  k.episode_utility = utility;
  return k;
}

double t_quantile_975(int df) {
  if (df < 1) throw std::invalid_argument("degrees of freedom must be >= 1");
  if (df <= 200) return kT975[df - 1];
  const double z = 1.959963984540054;
  const double z3 = z * z * z, z5 = z3 * z * z;
  const double n = static_cast<double>(df);
  return z + (z3 + z) / (4.0 * n) + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * n * n);
}

CiStat mean_ci(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("a confidence interval needs at least 2 runs");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double s = std::sqrt(ss / (n - 1.0));
  return CiStat{mean, t_quantile_975(static_cast<int>(values.size()) - 1) * s / std::sqrt(n),
                static_cast<int>(values.size())};
}

KpiAggregate aggregate_runs(std::span<const KpiRecord> records) {
  if (records.size() < 2) throw std::invalid_argument("aggregation needs at least 2 runs");
  auto column = [&](double KpiRecord::*field) {
    std::vector<double> v;
    v.reserve(records.size());
    for (const auto& r : records) v.push_back(r.*field);
    return mean_ci(v);
  };
  return KpiAggregate{column(&KpiRecord::mean_throughput_mbps), column(&KpiRecord::handover_rate),
                      column(&KpiRecord::pingpong_rate_pct), column(&KpiRecord::ho_failure_fraction),
                      column(&KpiRecord::episode_utility)};
}

const CiStat& summary_stat(const KpiAggregate& agg, std::string_view kpi) {
  if (kpi == "throughput_mbps") return agg.throughput_mbps;
  if (kpi == "handover_rate") return agg.handover_rate;
  if (kpi == "pingpong_rate_pct") return agg.pingpong_rate_pct;
  if (kpi == "ho_failure_fraction") return agg.ho_failure_fraction;
  if (kpi == "episode_utility") return agg.episode_utility;
  throw std::invalid_argument("unknown KPI '" + std::string(kpi) + "'");
}

}  // namespace ahc
