#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ahc/controllers.hpp"
#include "ahc/utility.hpp"

namespace ahc {

struct HoEvent {
  int tick = 0;
  int ue_id = 0;
  int from_cell = 0;
  int to_cell = 0;
  bool success = true;
  bool pingpong = false;
  HoReason reason = HoReason::kNone;
};

/// Online ping-pong flagging (the rule of detect_pingpong).
class PingPongDetector {
 public:
  explicit PingPongDetector(int window_ticks) : window_(window_ticks) {}
  /// Sets e.pingpong; events of one UE must arrive in tick order.
  void observe(HoEvent& e);

 private:
  struct Last {
    int tick, from, to;
  };
  int window_;
  std::vector<std::optional<Last>> last_;
  std::vector<int> last_tick_;
};

/// Flags a successful handover A->B when the UE's immediately preceding
/// successful handover was B->A no more than window_ticks earlier. Failed
/// handovers are never flagged and do not break a return pair. Events must
/// be ordered by tick within each UE; throws std::invalid_argument otherwise.
void detect_pingpong(std::span<HoEvent> events, int window_ticks);

/// Sum over aligned per-(UE, tick) entries of the weighted utility.
/// Throws std::invalid_argument on a length mismatch.
double episode_utility(std::span<const double> throughput_mbps, std::span<const bool> handover,
                       std::span<const bool> pingpong, const UtilityWeights& weights);

struct KpiRecord {
  double mean_throughput_mbps = 0.0;
  double handover_rate = 0.0;         // attempts / (n_ues * n_ticks)
  double pingpong_rate_pct = 0.0;     // flagged / successful handovers * 100
  double ho_failure_fraction = 0.0;   // failures / attempts
  long long handover_attempts = 0;
  long long handover_failures = 0;
  long long pingpongs = 0;
  double episode_utility = 0.0;
  int n_ues = 0;
  int n_ticks = 0;
};

/// Builds the rate fields from an event log and the per-UE-tick throughput sum.
KpiRecord kpi_from_events(std::span<const HoEvent> events, double throughput_sum_mbps, double utility, int n_ues,
                          int n_ticks);

/// Two-sided 95% Student-t quantile t_{0.975, df}. Tabulated for df 1..200;
/// beyond that a Cornish-Fisher expansion around the normal quantile.
double t_quantile_975(int df);

struct CiStat {
  double mean = 0.0;
  double half_width = 0.0;
  int n = 0;
  double lo() const { return mean - half_width; }
  double hi() const { return mean + half_width; }
};

/// mean +- t_{0.975,n-1} s / sqrt(n); throws std::invalid_argument for n < 2.
CiStat mean_ci(std::span<const double> values);

struct KpiAggregate {
  CiStat throughput_mbps;
  CiStat handover_rate;
  CiStat pingpong_rate_pct;
  CiStat ho_failure_fraction;
  CiStat episode_utility;
};

KpiAggregate aggregate_runs(std::span<const KpiRecord> records);

/// Names of the three headline KPIs in summary order.
inline constexpr std::array<std::string_view, 3> kSummaryKpis = {"throughput_mbps", "handover_rate",
                                                                 "pingpong_rate_pct"};
const CiStat& summary_stat(const KpiAggregate& agg, std::string_view kpi);

}  // namespace ahc
