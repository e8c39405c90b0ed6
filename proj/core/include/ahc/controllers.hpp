#pragma once

#include <algorithm>
#include <span>
#include <string_view>
#include <vector>

#include "ahc/messages.hpp"

namespace ahc {

struct A3Config {
  bool operator==(const A3Config&) const = default;

  double hysteresis_db = 3.0;
  double cio_db = 0.0;
  /// Optional per-pair offsets, row = serving, column = candidate; when
  /// empty every pair uses cio_db.
  std::vector<std::vector<double>> cio_pairs;
  int ttt_ticks = 4;

  double cio(int serving, int candidate) const;
  void validate() const;
};

/// Consecutive-satisfaction counter per candidate cell for one UE.
class A3TimerState {
 public:
  A3TimerState() = default;
  explicit A3TimerState(std::size_t n_cells) : counters_(n_cells, 0) {}

  void reset() { std::fill(counters_.begin(), counters_.end(), 0); }
  int counter(int cell) const { return counters_.at(static_cast<std::size_t>(cell)); }
  std::vector<int>& counters() { return counters_; }

 private:
  std::vector<int> counters_;
};

enum class HoReason { kNone, kA3Trigger, kLoad, kRanking, kPrediction, kGuardReject };

std::string_view reason_name(HoReason reason);

struct HoDecision {
  bool handover = false;
  int target = -1;
  HoReason reason = HoReason::kNone;

  static HoDecision stay(HoReason reason = HoReason::kNone) { return {false, -1, reason}; }
  static HoDecision to(int target, HoReason reason) { return {true, target, reason}; }
};

/// Advances every candidate counter by one tick and hands over once any
/// counter reaches ttt_ticks (strongest complete candidate, then lowest id).
HoDecision a3_decide(const A3Config& config, A3TimerState& timers, int serving, std::span<const double> rsrp);

/// Overloaded serving cell (rho > load_hi) moves to the least-loaded
/// neighbour above rsrp_floor that is less loaded than the serving cell;
/// ties go to the stronger RSRP, then the lower id.
HoDecision load_balance_decide(int serving, std::span<const double> rsrp, std::span<const double> loads,
                               double load_hi, double rsrp_floor);

/// Reactive proxy on predicted RSRP: hand over to the predicted-best cell
/// when it leads the serving cell by at least margin_db.
HoDecision ml_assisted_decide(int serving, std::span<const double> predicted_rsrp, double margin_db);

struct AhcGuard {
  bool operator==(const AhcGuard&) const = default;

  double rsrp_floor = -110.0;
  double load_max = 1.0;
  /// Required live-RSRP lead of the target over the serving cell; a value
  /// <= 0 disables the check.
  double stickiness_db = 2.0;
  /// Skip the cell the UE left within this many ticks, unless the serving
  /// cell is below rsrp_floor; 0 disables.
  int return_guard_ticks = 10;
};

/// Walks a fresh ranking top-down and takes the first cell passing the
/// floor, load and return guards. A missing or expired ranking falls back
/// to A3 on the same report; A3 timers advance on every call either way.
HoDecision ahc_xapp_decide(const A1Ranking* ranking, const E2Report& report, const AhcGuard& guard,
                           const A3Config& a3, A3TimerState& timers);

}  // namespace ahc
