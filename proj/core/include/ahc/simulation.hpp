#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ahc/kpi.hpp"
#include "ahc/mobility.hpp"
#include "ahc/radio.hpp"
#include "ahc/ric_bus.hpp"

namespace ahc {

struct SimParams {
  Topology topology;
  PopulationConfig population;  // history_ticks is set by the simulator
  ControllerConfig controllers;
  RappConfig rapp;
  UtilityWeights utility;
  int pingpong_window = 10;
  double capacity_factor = 2.0;  // capacity = ceil(factor * n_ues / n_cells)
  /// Layer-3 measurement filter F = (1-a) F + a M with a = 2^(-k/4) on the
  /// reported RSRP; k = 0 reports raw measurements.
  int l3_filter_k = 4;

  int capacity() const;
  void validate() const;
};

struct SimModels {
  const PredictorBundle* predictors = nullptr;  // AHC and ML-Assisted
  const PolicyNet* policy = nullptr;            // AHC
  StateScaling scaling;
};

/// Per-UE, per-tick KPI row.
struct TickRow {
  int tick = 0;
  int ue_id = 0;
  int serving = 0;
  double rsrp_serving = 0.0;
  double throughput_mbps = 0.0;
  bool handover = false;
  bool pingpong = false;
};

struct SimResult {
  KpiRecord kpi;
  std::vector<HoEvent> events;
  std::vector<TickRow> ticks;  // only when recording is enabled
  std::size_t rapp_skipped = 0;
  std::size_t missing_reports = 0;
};

/// One run of the tick loop. Ticks can be driven in two phases so that an
/// external learner can replace the rApp's rankings before the xApp acts.
class Simulation {
 public:
  Simulation(const SimParams& params, ControllerKind kind, std::uint64_t seed, const SimModels& models,
             bool record_ticks = false, std::ostream* message_log = nullptr);
  /// Runs on the given traces instead of generating a population. Each
  /// trace needs history_ticks() samples before tick 0 plus n_ticks more;
  /// `seed` still drives shadowing.
  Simulation(const SimParams& params, ControllerKind kind, std::uint64_t seed, const SimModels& models,
             std::vector<Trace> traces, bool record_ticks = false, std::ostream* message_log = nullptr);

  /// Samples a trace must carry before tick 0 for the given models.
  static int history_ticks(const SimModels& models);

  int tick() const { return tick_; }
  bool finished() const { return tick_ >= n_ticks_; }
  std::size_t n_ues() const { return traces_.size(); }
  int capacity() const { return capacity_; }

  /// Measures the channel for the current tick and, on rApp ticks under the
  /// AHC controller, runs the rApp. Returns the decisions whose rankings will
  /// be published; callers may edit the rankings in place.
  std::vector<RappDecision>& begin_tick();
  /// Publishes rankings, runs the xApp, executes handovers and accounts KPIs.
  void end_tick();
  void run();

  /// Utility accrued by each UE during the last completed tick.
  const std::vector<double>& last_utility() const { return last_utility_; }
  const std::vector<int>& serving() const { return serving_; }
  const std::vector<int>& attached() const { return attached_; }
  const std::vector<Trace>& traces() const { return traces_; }

  SimResult result() const;

 private:
  void start(std::uint64_t seed);

  SimParams params_;
  ControllerKind kind_;
  SimModels models_;
  bool record_;
  MessageLog log_;

  int n_ticks_;
  int history_;
  int capacity_;
  int tick_ = 0;
  bool in_tick_ = false;

  std::vector<Trace> traces_;
  std::vector<RandomStream> shadow_streams_;
  std::vector<ShadowingProcess> shadowing_;
  std::vector<int> serving_;
  std::vector<std::optional<RecentHandover>> last_ho_;
  std::vector<int> attached_;
  std::vector<A3TimerState> timers_;
  std::vector<RsrpVector> rsrp_;      // instantaneous, drives throughput and HO success
  std::vector<RsrpVector> measured_;  // L3-filtered, reported over E2
  std::vector<RsrpVector> predicted_;
  std::vector<E2Report> reports_;
  A1Cache cache_;
  RappState rapp_state_;
  std::vector<RappDecision> pending_;
  PingPongDetector pingpong_;

  std::vector<double> last_utility_;
  std::vector<HoEvent> events_;
  std::vector<TickRow> rows_;
  double throughput_sum_ = 0.0;
  double utility_sum_ = 0.0;
  std::size_t rapp_skipped_ = 0;
  std::size_t missing_reports_ = 0;
  FeedbackRecord period_feedback_;
};

/// Convenience wrapper: construct, run all ticks, return the result.
SimResult run_simulation(const SimParams& params, ControllerKind kind, std::uint64_t seed, const SimModels& models,
                         bool record_ticks = false, std::ostream* message_log = nullptr);

/// tick,ue_id,serving,rsrp_serving,throughput,ho_flag,pp_flag
void write_tick_csv(std::ostream& out, std::span<const TickRow> rows);
/// tick,ue_id,from_cell,to_cell,outcome,pingpong,reason
void write_event_csv(std::ostream& out, std::span<const HoEvent> events);

}  // namespace ahc
