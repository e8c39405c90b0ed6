#pragma once
// JSON field mapping shared by the config loader and the policy checkpoint.

#include <json.hpp>
#include <stdexcept>
#include <string>

#include "ahc/ppo.hpp"

namespace ahc::codec {

using nlohmann::json;

/// Reads `key` into `out` if present; type errors name the key.
template <class T>
void read(const json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline json to_json(const UtilityWeights& w) {
  return {{"alpha", w.alpha}, {"beta", w.beta}, {"gamma_pp", w.gamma_pp}, {"w_u", w.w_u},
          {"r_norm_mbps", w.r_norm_mbps}};
}

inline void from_json(const json& j, UtilityWeights& w) {
  read(j, "alpha", w.alpha);
  read(j, "beta", w.beta);
  read(j, "gamma_pp", w.gamma_pp);
  read(j, "w_u", w.w_u);
  read(j, "r_norm_mbps", w.r_norm_mbps);
}

inline json to_json(const PpoConfig& c) {
  return {{"clip", c.clip},
          {"discount", c.discount},
          {"gae_lambda", c.gae_lambda},
          {"entropy_coef", c.entropy_coef},
          {"value_coef", c.value_coef},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"minibatch", c.minibatch},
          {"max_grad_norm", c.max_grad_norm},
          {"hidden", c.hidden},
          {"reward", to_json(c.reward)},
          {"scenario_pool", c.scenario_pool},
          {"normalize_returns", c.normalize_returns}};
}

inline void from_json(const json& j, PpoConfig& c) {
  read(j, "clip", c.clip);
  read(j, "discount", c.discount);
  read(j, "gae_lambda", c.gae_lambda);
  read(j, "entropy_coef", c.entropy_coef);
  read(j, "value_coef", c.value_coef);
  read(j, "learning_rate", c.learning_rate);
  read(j, "epochs", c.epochs);
  read(j, "minibatch", c.minibatch);
  read(j, "max_grad_norm", c.max_grad_norm);
  read(j, "hidden", c.hidden);
  read(j, "scenario_pool", c.scenario_pool);
  read(j, "normalize_returns", c.normalize_returns);
  if (auto it = j.find("reward"); it != j.end()) from_json(*it, c.reward);
}

inline json to_json(const StateScaling& s) {
  return {{"position_scale_m", s.position_scale_m},
          {"rsrp_reference_dbm", s.rsrp_reference_dbm},
          {"rsrp_scale_db", s.rsrp_scale_db}};
}

inline void from_json(const json& j, StateScaling& s) {
  read(j, "position_scale_m", s.position_scale_m);
  read(j, "rsrp_reference_dbm", s.rsrp_reference_dbm);
  read(j, "rsrp_scale_db", s.rsrp_scale_db);
}

}  // namespace ahc::codec
