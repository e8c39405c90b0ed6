#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ahc/geometry.hpp"
#include "ahc/mobility.hpp"
#include "ahc/ppo.hpp"
#include "ahc/radio.hpp"

namespace ahc {

/// The UE's most recent successful handover.
struct RecentHandover {
  int from_cell = -1;
  int tick = 0;
};

/// Per-UE live measurement report (RAN -> near-RT RIC).
struct E2Report {
  int tick = 0;
  int ue_id = 0;
  int serving_cell = 0;
  RsrpVector rsrp;
  std::optional<Vec2> position;
  std::vector<double> loads;  // rho per cell, in [0, 1]
  std::optional<RecentHandover> last_handover;
};

/// Ranked handover candidates for one UE (rApp -> xApp).
struct A1Ranking {
  int ue_id = 0;
  std::vector<RankedCell> candidates;
  int issued_tick = 0;
  int ttl_ticks = 10;
  MobilityMode mode_hint = MobilityMode::kPed;
  std::optional<std::string> kpi_preferences;  // carried, not interpreted

  /// Inclusive: valid for ticks issued_tick .. issued_tick + ttl_ticks.
  bool valid_at(int tick) const { return tick >= issued_tick && tick <= issued_tick + ttl_ticks; }
  /// Throws std::invalid_argument unless candidates are nonempty, distinct
  /// and ordered by nonincreasing score.
  void validate() const;
};

/// Handover command (near-RT RIC -> RAN).
struct E2Control {
  int tick = 0;
  int ue_id = 0;
  int target_cell = 0;
};

/// Run-level outcome summary reported back towards the rApp.
struct FeedbackRecord {
  int tick = 0;
  long long handover_attempts = 0;
  long long handover_failures = 0;
  long long pingpongs = 0;
  double mean_throughput_mbps = 0.0;
};

}  // namespace ahc
