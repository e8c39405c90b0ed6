#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "ahc/controllers.hpp"
#include "ahc/messages.hpp"
#include "ahc/ppo.hpp"
#include "ahc/predictors.hpp"

namespace ahc {

/// Newest ranking per UE. Expired entries are dropped when read.
class A1Cache {
 public:
  enum class Status { kMissing, kValid, kStale };

  /// A ranking replaces the stored one unless the stored one was issued later.
  void update(std::span<const A1Ranking> rankings);
  void update(const A1Ranking& ranking);

  Status status(int ue_id, int tick) const;
  /// Valid ranking for the UE at `tick`, or nullptr. Stale entries are
  /// evicted; rankings issued after `tick` are not visible.
  const A1Ranking* lookup(int ue_id, int tick);

  std::size_t size() const { return entries_.size(); }

 private:
  std::map<int, A1Ranking> entries_;
};

struct RappConfig {
  bool operator==(const RappConfig&) const = default;

  int period_ticks = 10;
  int ttl_ticks = 10;
  double mask_radius_factor = 2.0;  // admissible: serving + sites within factor * coverage of p_hat
};

struct RappModels {
  const PredictorBundle* predictors = nullptr;
  const PolicyNet* policy = nullptr;
  StateScaling scaling;
};

/// What the rApp knows about one UE: its trace up to the previous tick and
/// the serving cell last reported.
struct UeHistory {
  int ue_id = 0;
  int serving_cell = 0;
  std::span<const TraceSample> samples;
};

/// Self-fed previous-mode estimate per UE, seeded with PED.
class RappState {
 public:
  MobilityMode previous(int ue_id) const;
  void set(int ue_id, MobilityMode mode) { previous_[ue_id] = mode; }

 private:
  std::map<int, MobilityMode> previous_;
};

struct RappDecision {
  int ue_id = 0;
  MobilityMode mode = MobilityMode::kPed;
  Vec2 predicted_position;
  RsrpVector predicted_rsrp;
  std::vector<double> state;
  ActionMask mask;
  A1Ranking ranking;
};

struct RappOutput {
  std::vector<RappDecision> decisions;
  std::size_t skipped = 0;  // UEs with too little history
};

bool is_rapp_tick(int tick, const RappConfig& config);

/// Serving cell plus every site within factor * coverage radius of `p`.
ActionMask admissible_cells(const Topology& topology, Vec2 p, int serving, double factor);

/// Classify, predict position and RSRP, build the policy state, rank.
/// Reads only the supplied history; updates the self-feedback state.
RappOutput rapp_step(const RappModels& models, const Topology& topology, std::span<const UeHistory> history,
                     int tick, const RappConfig& config, RappState& state);

enum class ControllerKind { kA3, kLoadBalance, kMlAssisted, kAhc };

std::string_view controller_name(ControllerKind kind);
/// "a3", "load_balance", "ml_assisted", "ahc"; throws std::invalid_argument.
ControllerKind parse_controller(std::string_view name);
std::vector<ControllerKind> parse_controller_list(std::string_view comma_separated);
inline constexpr std::array<ControllerKind, 4> kAllControllers = {
    ControllerKind::kMlAssisted, ControllerKind::kAhc, ControllerKind::kA3, ControllerKind::kLoadBalance};

struct ControllerConfig {
  bool operator==(const ControllerConfig&) const = default;

  A3Config a3;
  double load_hi = 0.7;
  double rsrp_floor = -110.0;  // load-balance target floor and handover failure threshold
  double ml_margin_db = 1.0;
  AhcGuard ahc;

  void validate() const;
};

struct XappResult {
  std::vector<E2Control> controls;
  std::vector<HoDecision> decisions;  // parallel to the reports
  std::size_t missing_reports = 0;
};

/// Runs the configured controller for every reported UE. `timers` is
/// indexed by ue_id. `predicted_rsrp` (indexed by ue_id) is only read by
/// the ML-Assisted proxy; only the AHC rule reads the A1 cache.
XappResult xapp_step(ControllerKind kind, const ControllerConfig& config, A1Cache& cache,
                     std::span<const E2Report> reports, std::span<const RsrpVector> predicted_rsrp, int tick,
                     std::vector<A3TimerState>& timers, std::size_t n_ues);

/// JSON-lines trace of bus traffic; the "type" field comes first.
class MessageLog {
 public:
  explicit MessageLog(std::ostream* out) : out_(out) {}
  bool enabled() const { return out_ != nullptr; }
  void log(const E2Report& m);
  void log(const A1Ranking& m);
  void log(const E2Control& m);
  void log(const FeedbackRecord& m);

 private:
  std::ostream* out_;
};

/// Model/policy refresh point. Retraining is out of scope, so this only
/// records the feedback.
void refresh_hook(const FeedbackRecord& feedback, MessageLog& log);

}  // namespace ahc
