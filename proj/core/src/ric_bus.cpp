#include "ahc/ric_bus.hpp"

#include <cmath>
#include <json.hpp>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

namespace ahc {

void A1Ranking::validate() const {
  if (candidates.empty()) throw std::invalid_argument("A1 ranking has no candidates");
  std::set<int> seen;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!seen.insert(candidates[i].cell_id).second) throw std::invalid_argument("A1 ranking repeats a cell");
    if (i > 0 && candidates[i].score > candidates[i - 1].score)
      throw std::invalid_argument("A1 ranking scores must be nonincreasing");
  }
  if (ttl_ticks < 0) throw std::invalid_argument("A1 ranking ttl must be >= 0");
}

void A1Cache::update(const A1Ranking& ranking) {
  auto [it, inserted] = entries_.try_emplace(ranking.ue_id, ranking);
  if (!inserted && ranking.issued_tick >= it->second.issued_tick) it->second = ranking;
}

void A1Cache::update(std::span<const A1Ranking> rankings) {
  for (const auto& r : rankings) update(r);
}

A1Cache::Status A1Cache::status(int ue_id, int tick) const {
  auto it = entries_.find(ue_id);
  if (it == entries_.end()) return Status::kMissing;
  return it->second.valid_at(tick) ? Status::kValid : Status::kStale;
}

const A1Ranking* A1Cache::lookup(int ue_id, int tick) {
  auto it = entries_.find(ue_id);
  if (it == entries_.end()) return nullptr;
  if (tick > it->second.issued_tick + it->second.ttl_ticks) {
    entries_.erase(it);
    return nullptr;
  }
  return it->second.valid_at(tick) ? &it->second : nullptr;
}

MobilityMode RappState::previous(int ue_id) const {
  auto it = previous_.find(ue_id);
  return it == previous_.end() ? MobilityMode::kPed : it->second;
}

bool is_rapp_tick(int tick, const RappConfig& config) {
  return tick >= 0 && tick % config.period_ticks == 0;
}

ActionMask admissible_cells(const Topology& topology, Vec2 p, int serving, double factor) {
  ActionMask mask(topology.size(), false);
  for (const auto& site : topology.sites)
    if (distance(site.position, p) <= factor * site.coverage_radius_m)
      mask[static_cast<std::size_t>(site.cell_id)] = true;
  mask.at(static_cast<std::size_t>(serving)) = true;
  return mask;
}

RappOutput rapp_step(const RappModels& models, const Topology& topology, std::span<const UeHistory> history,
                     int tick, const RappConfig& config, RappState& state) {
  if (models.predictors == nullptr || models.policy == nullptr)
    throw std::invalid_argument("rApp needs predictor and policy models");
  const PredictorBundle& pb = *models.predictors;
  const auto window = static_cast<std::size_t>(pb.classifier.window);
  RappOutput out;
  std::vector<Kinematics> kin;
  for (const UeHistory& h : history) {
    if (h.samples.size() < std::max<std::size_t>(window, 2)) {
      ++out.skipped;
      continue;
    }
    kin.clear();
    for (std::size_t i = h.samples.size() - window; i < h.samples.size(); ++i) kin.push_back(h.samples[i].kin);
    const MobilityMode mode = pb.classifier.classify(kin, state.previous(h.ue_id));
    state.set(h.ue_id, mode);

    const TraceSample& cur = h.samples.back();
    const TraceSample& prev = h.samples[h.samples.size() - 2];
    RappDecision d;
    d.ue_id = h.ue_id;
    d.mode = mode;
    d.predicted_position = pb.trajectory.predict(prev, cur, mode);
    d.predicted_rsrp = pb.rsrp.predict(cur, mode);
    d.state = make_policy_state(mode, d.predicted_position, d.predicted_rsrp, models.scaling);
    d.mask = admissible_cells(topology, d.predicted_position, h.serving_cell, config.mask_radius_factor);
    d.ranking.ue_id = h.ue_id;
    d.ranking.candidates = rank_cells(*models.policy, d.state, d.mask);
    d.ranking.issued_tick = tick;
    d.ranking.ttl_ticks = config.ttl_ticks;
    d.ranking.mode_hint = mode;
    out.decisions.push_back(std::move(d));
  }
  return out;
}

std::string_view controller_name(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kA3: return "a3";
    case ControllerKind::kLoadBalance: return "load_balance";
    case ControllerKind::kMlAssisted: return "ml_assisted";
    case ControllerKind::kAhc: return "ahc";
  }
  return "unknown";
}

ControllerKind parse_controller(std::string_view name) {
  for (ControllerKind k : kAllControllers)
    if (controller_name(k) == name) return k;
  throw std::invalid_argument("unknown controller '" + std::string(name) +
                              "' (expected a3, load_balance, ml_assisted or ahc)");
}

std::vector<ControllerKind> parse_controller_list(std::string_view list) {
  std::vector<ControllerKind> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t end = std::min(list.find(',', start), list.size());
    std::string_view item = list.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      const ControllerKind k = parse_controller(item);
      if (std::find(out.begin(), out.end(), k) != out.end())
        throw std::invalid_argument("controller listed twice: " + std::string(item));
      out.push_back(k);
    }
    start = end + 1;
  }
  if (out.empty()) throw std::invalid_argument("controller list is empty");
  return out;
}

void ControllerConfig::validate() const {
  a3.validate();
  if (!(load_hi >= 0.0 && load_hi <= 1.0)) throw std::invalid_argument("load_hi must be in [0, 1]");
  if (std::isnan(rsrp_floor) || std::isnan(ahc.rsrp_floor)) throw std::invalid_argument("rsrp floor is NaN");
  if (!(ml_margin_db >= 0.0)) throw std::invalid_argument("ml_margin_db must be >= 0");
  if (!(ahc.load_max > 0.0 && ahc.load_max <= 1.0)) throw std::invalid_argument("ahc load_max must be in (0, 1]");
  if (std::isnan(ahc.stickiness_db)) throw std::invalid_argument("ahc stickiness is NaN");
  if (ahc.return_guard_ticks < 0) throw std::invalid_argument("ahc return_guard_ticks must be >= 0");
}

XappResult xapp_step(ControllerKind kind, const ControllerConfig& config, A1Cache& cache,
                     std::span<const E2Report> reports, std::span<const RsrpVector> predicted_rsrp, int tick,
                     std::vector<A3TimerState>& timers, std::size_t n_ues) {
  XappResult out;
  std::vector<bool> seen(n_ues, false);
  out.decisions.reserve(reports.size());
  for (const E2Report& r : reports) {
    if (r.ue_id < 0 || static_cast<std::size_t>(r.ue_id) >= n_ues) throw std::invalid_argument("report for unknown UE");
    const auto u = static_cast<std::size_t>(r.ue_id);
    if (seen[u]) throw std::invalid_argument("duplicate E2 report for a UE");
    seen[u] = true;
    HoDecision d;
    switch (kind) {
      case ControllerKind::kA3:
        d = a3_decide(config.a3, timers.at(u), r.serving_cell, r.rsrp);
        break;
      case ControllerKind::kLoadBalance:
        d = load_balance_decide(r.serving_cell, r.rsrp, r.loads, config.load_hi, config.rsrp_floor);
        break;
      case ControllerKind::kMlAssisted:
        if (u >= predicted_rsrp.size() || predicted_rsrp[u].size() != r.rsrp.size())
          throw std::invalid_argument("ML-Assisted controller needs a predicted RSRP vector per UE");
        d = ml_assisted_decide(r.serving_cell, predicted_rsrp[u], config.ml_margin_db);
        break;
      case ControllerKind::kAhc:
        d = ahc_xapp_decide(cache.lookup(r.ue_id, tick), r, config.ahc, config.a3, timers.at(u));
        break;
    }
    if (d.handover) out.controls.push_back(E2Control{tick, r.ue_id, d.target});
    out.decisions.push_back(d);
  }
  for (bool s : seen) out.missing_reports += s ? 0 : 1;
  return out;
}

namespace {

using ojson = nlohmann::ordered_json;

void emit(std::ostream* out, const ojson& j) {
  if (out) *out << j.dump() << '\n';
}

}  // namespace

void MessageLog::log(const E2Report& m) {
  if (!out_) return;
  ojson j;
  j["type"] = "e2_report";
  j["tick"] = m.tick;
  j["ue_id"] = m.ue_id;
  j["serving_cell"] = m.serving_cell;
  j["rsrp"] = m.rsrp;
  if (m.position) j["position"] = {m.position->x, m.position->y};
  if (m.last_handover) j["last_handover"] = {{"from_cell", m.last_handover->from_cell}, {"tick", m.last_handover->tick}};
  j["loads"] = m.loads;
  emit(out_, j);
}

void MessageLog::log(const A1Ranking& m) {
  if (!out_) return;
  ojson j;
  j["type"] = "a1_ranking";
  j["ue_id"] = m.ue_id;
  j["issued_tick"] = m.issued_tick;
  j["ttl_ticks"] = m.ttl_ticks;
  j["mode_hint"] = std::string(mode_name(m.mode_hint));
  ojson cands = ojson::array();
  for (const auto& c : m.candidates) cands.push_back({c.cell_id, c.score});
  j["candidates"] = cands;
  if (m.kpi_preferences) j["kpi_preferences"] = *m.kpi_preferences;
  emit(out_, j);
}

void MessageLog::log(const E2Control& m) {
  if (!out_) return;
  ojson j;
  j["type"] = "e2_control";
  j["tick"] = m.tick;
  j["ue_id"] = m.ue_id;
  j["target_cell"] = m.target_cell;
  emit(out_, j);
}

void MessageLog::log(const FeedbackRecord& m) {
  if (!out_) return;
  ojson j;
  j["type"] = "feedback";
  j["tick"] = m.tick;
  j["handover_attempts"] = m.handover_attempts;
  j["handover_failures"] = m.handover_failures;
  j["pingpongs"] = m.pingpongs;
  j["mean_throughput_mbps"] = m.mean_throughput_mbps;
  emit(out_, j);
}

void refresh_hook(const FeedbackRecord& feedback, MessageLog& log) { log.log(feedback); }

}  // namespace ahc
