#include "ahc/controllers.hpp"

#include <cmath>
#include <stdexcept>

namespace ahc {

double A3Config::cio(int serving, int candidate) const {
  if (cio_pairs.empty()) return cio_db;
  return cio_pairs.at(static_cast<std::size_t>(serving)).at(static_cast<std::size_t>(candidate));
}

void A3Config::validate() const {
  if (!(hysteresis_db >= 0.0)) throw std::invalid_argument("a3 hysteresis must be >= 0");
  if (ttt_ticks < 1) throw std::invalid_argument("a3 ttt_ticks must be >= 1");
  if (!std::isfinite(cio_db)) throw std::invalid_argument("a3 cio must be finite");
  for (const auto& row : cio_pairs) {
    if (row.size() != cio_pairs.size()) throw std::invalid_argument("a3 cio_pairs must be square");
    for (double v : row)
      if (!std::isfinite(v)) throw std::invalid_argument("a3 cio_pairs must be finite");
  }
}

std::string_view reason_name(HoReason reason) {
  switch (reason) {
    case HoReason::kNone: return "none";
    case HoReason::kA3Trigger: return "a3_trigger";
    case HoReason::kLoad: return "load";
    case HoReason::kRanking: return "ranking";
    case HoReason::kPrediction: return "prediction";
    case HoReason::kGuardReject: return "guard_reject";
  }
  return "unknown";
}

HoDecision a3_decide(const A3Config& config, A3TimerState& timers, int serving, std::span<const double> rsrp) {
  auto& counters = timers.counters();
  if (counters.size() != rsrp.size()) counters.assign(rsrp.size(), 0);
  const double threshold = rsrp[static_cast<std::size_t>(serving)] + config.hysteresis_db;
  int best = -1;
  for (std::size_t c = 0; c < rsrp.size(); ++c) {
    const int cell = static_cast<int>(c);
    if (cell == serving) {
      counters[c] = 0;
      continue;
    }
    if (rsrp[c] + config.cio(serving, cell) > threshold)
      ++counters[c];
    else
      counters[c] = 0;
    if (counters[c] >= config.ttt_ticks && (best < 0 || rsrp[c] > rsrp[static_cast<std::size_t>(best)]))
      best = cell;
  }
  return best >= 0 ? HoDecision::to(best, HoReason::kA3Trigger) : HoDecision::stay();
}

HoDecision load_balance_decide(int serving, std::span<const double> rsrp, std::span<const double> loads,
                               double load_hi, double rsrp_floor) {
  const auto s = static_cast<std::size_t>(serving);
  if (!(loads[s] > load_hi)) return HoDecision::stay();
  int best = -1;
  for (std::size_t c = 0; c < rsrp.size(); ++c) {
    if (c == s || rsrp[c] < rsrp_floor || !(loads[c] < loads[s])) continue;
    if (best < 0) {
      best = static_cast<int>(c);
      continue;
    }
    const auto b = static_cast<std::size_t>(best);
    if (loads[c] < loads[b] || (loads[c] == loads[b] && rsrp[c] > rsrp[b])) best = static_cast<int>(c);
  }
  return best >= 0 ? HoDecision::to(best, HoReason::kLoad) : HoDecision::stay(HoReason::kGuardReject);
}

HoDecision ml_assisted_decide(int serving, std::span<const double> predicted_rsrp, double margin_db) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < predicted_rsrp.size(); ++c)
    if (predicted_rsrp[c] > predicted_rsrp[best]) best = c;
  const auto s = static_cast<std::size_t>(serving);
  if (best == s || predicted_rsrp[best] - predicted_rsrp[s] < margin_db) return HoDecision::stay();
  return HoDecision::to(static_cast<int>(best), HoReason::kPrediction);
}

HoDecision ahc_xapp_decide(const A1Ranking* ranking, const E2Report& report, const AhcGuard& guard,
                           const A3Config& a3, A3TimerState& timers) {
  const int serving = report.serving_cell;
  const std::span<const double> live(report.rsrp);
  const HoDecision fallback = a3_decide(a3, timers, serving, live);
  if (ranking == nullptr || !ranking->valid_at(report.tick) || ranking->candidates.empty()) return fallback;

  const auto s = static_cast<std::size_t>(serving);
  int blocked = -1;
  if (guard.return_guard_ticks > 0 && report.last_handover && live[s] >= guard.rsrp_floor &&
      report.tick - report.last_handover->tick <= guard.return_guard_ticks)
    blocked = report.last_handover->from_cell;
  for (const RankedCell& cand : ranking->candidates) {
    const auto c = static_cast<std::size_t>(cand.cell_id);
    if (c >= live.size() || cand.cell_id == blocked) continue;
    if (live[c] < guard.rsrp_floor || !(report.loads[c] < guard.load_max)) continue;
    if (c == s) return HoDecision::stay(HoReason::kRanking);
    if (guard.stickiness_db > 0.0 && live[c] - live[s] < guard.stickiness_db)
      return HoDecision::stay(HoReason::kGuardReject);
    return HoDecision::to(cand.cell_id, HoReason::kRanking);
  }
  return HoDecision::stay(HoReason::kGuardReject);
}

}  // namespace ahc
