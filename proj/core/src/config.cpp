#include "ahc/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json_codec.hpp"

namespace ahc {

using codec::json;
using codec::read;

Topology TopologyConfig::build() const {
  Topology t = build_ring_topology(n_cells, ring_radius_m, coverage_radius_m, tx_power_dbm);
  t.carrier_freq_ghz = carrier_freq_ghz;
  t.bandwidth_hz = bandwidth_hz;
  t.shadowing_sigma_db = shadowing_sigma_db;
  t.noise_figure_db = noise_figure_db;
  t.shadowing_decorrelation_m = shadowing_decorrelation_m;
  return t;
}

namespace {

void check_forest(const ForestParams& p, const char* name) {
  if (p.n_trees < 1 || p.max_depth < 1 || p.min_leaf < 1 || p.max_features < 0)
    throw std::invalid_argument(std::string(name) + ": forest sizes must be >= 1 (max_features >= 0)");
}

}  // namespace

void RunConfig::validate() const {
  if (schema_version != kConfigSchemaVersion)
    throw std::invalid_argument("unsupported schema_version " + std::to_string(schema_version) + " (expected " +
                                std::to_string(kConfigSchemaVersion) + ")");
  if (!(topology.ring_radius_m > 0.0 && topology.coverage_radius_m > 0.0))
    throw std::invalid_argument("topology radii must be > 0");
  if (!(topology.carrier_freq_ghz > 0.0 && topology.bandwidth_hz > 0.0))
    throw std::invalid_argument("carrier frequency and bandwidth must be > 0");
  topology.build().validate();
  mobility.validate();
  if (mobility.history_ticks != 0) throw std::invalid_argument("mobility.history_ticks is managed by the simulator");

  if (predictors.knn_k < 1) throw std::invalid_argument("predictors.knn_k must be >= 1");
  if (predictors.window < 2) throw std::invalid_argument("predictors.window must be >= 2");
  if (!(predictors.previous_mode_weight >= 0.0))
    throw std::invalid_argument("predictors.previous_mode_weight must be >= 0");
  if (!(predictors.test_fraction > 0.0 && predictors.test_fraction < 1.0))
    throw std::invalid_argument("predictors.test_fraction must be in (0, 1)");
  check_forest(predictors.trajectory_forest, "predictors.trajectory_forest");
  check_forest(predictors.rsrp_forest, "predictors.rsrp_forest");

  ppo.validate();
  if (!(scaling.position_scale_m > 0.0 && scaling.rsrp_scale_db > 0.0))
    throw std::invalid_argument("scaling factors must be > 0");
  sim_params().validate();

  if (sim.n_runs < 1) throw std::invalid_argument("sim.n_runs must be >= 1");
  if (sim.workers < 0) throw std::invalid_argument("sim.workers must be >= 0");
  if (training.trace_files < 2) throw std::invalid_argument("training.trace_files must be >= 2");
  if (training.policy_episodes < 1) throw std::invalid_argument("training.policy_episodes must be >= 1");
  if (training.policy_ues < 1) throw std::invalid_argument("training.policy_ues must be >= 1");

  if (output_dir.empty()) throw std::invalid_argument("output_dir must not be empty");
  std::error_code ec;
  if (std::filesystem::exists(output_dir, ec) && !std::filesystem::is_directory(output_dir, ec))
    throw std::invalid_argument("output_dir exists and is not a directory: " + output_dir);
}

SimParams RunConfig::sim_params() const {
  SimParams p;
  p.topology = topology.build();
  p.population = mobility;
  p.controllers = controllers;
  p.rapp = rapp;
  p.utility = ppo.reward;
  p.pingpong_window = sim.pingpong_window;
  p.capacity_factor = sim.capacity_factor;
  p.l3_filter_k = sim.l3_filter_k;
  return p;
}

namespace {

json profile_to_json(const ModeProfile& p) {
  return {{"speed_min", p.speed_min},
          {"speed_max", p.speed_max},
          {"accel_std", p.accel_std},
          {"bearing_rate_std", p.bearing_rate_std},
          {"speed_reversion", p.speed_reversion},
          {"target_change_prob", p.target_change_prob},
          {"stop_probability", p.stop_probability},
          {"stop_dwell_ticks", p.stop_dwell_ticks},
          {"stop_decel", p.stop_decel}};
}

void profile_from_json(const json& j, ModeProfile& p) {
  read(j, "speed_min", p.speed_min);
  read(j, "speed_max", p.speed_max);
  read(j, "accel_std", p.accel_std);
  read(j, "bearing_rate_std", p.bearing_rate_std);
  read(j, "speed_reversion", p.speed_reversion);
  read(j, "target_change_prob", p.target_change_prob);
  read(j, "stop_probability", p.stop_probability);
  read(j, "stop_dwell_ticks", p.stop_dwell_ticks);
  read(j, "stop_decel", p.stop_decel);
}

json forest_to_json(const ForestParams& f) {
  return {{"n_trees", f.n_trees},
          {"max_depth", f.max_depth},
          {"min_leaf", f.min_leaf},
          {"bootstrap", f.bootstrap},
          {"max_features", f.max_features}};
}

void forest_from_json(const json& j, ForestParams& f) {
  read(j, "n_trees", f.n_trees);
  read(j, "max_depth", f.max_depth);
  read(j, "min_leaf", f.min_leaf);
  read(j, "bootstrap", f.bootstrap);
  read(j, "max_features", f.max_features);
}

json to_json(const RunConfig& c) {
  json mix = json::object(), profiles = json::object();
  for (MobilityMode m : kAllModes) {
    const std::string name(mode_name(m));
    mix[name] = c.mobility.mix[static_cast<std::size_t>(mode_index(m))];
    profiles[name] = profile_to_json(c.mobility.profiles[static_cast<std::size_t>(mode_index(m))]);
  }
  const auto& t = c.topology;
  const auto& m = c.mobility;
  const auto& a = m.arena;
  const auto& p = c.predictors;
  const auto& k = c.controllers;
  return {
      {"schema_version", c.schema_version},
      {"topology",
       {{"n_cells", t.n_cells},
        {"ring_radius_m", t.ring_radius_m},
        {"coverage_radius_m", t.coverage_radius_m},
        {"tx_power_dbm", t.tx_power_dbm},
        {"carrier_freq_ghz", t.carrier_freq_ghz},
        {"bandwidth_hz", t.bandwidth_hz},
        {"shadowing_sigma_db", t.shadowing_sigma_db},
        {"noise_figure_db", t.noise_figure_db},
        {"shadowing_decorrelation_m", t.shadowing_decorrelation_m}}},
      {"mobility",
       {{"n_ues", m.n_ues},
        {"n_ticks", m.n_ticks},
        {"tick_s", m.tick_s},
        {"mix", mix},
        {"profiles", profiles},
        {"arena", {{"x_min", a.x_min}, {"x_max", a.x_max}, {"y_min", a.y_min}, {"y_max", a.y_max}}},
        {"start_r_inner_m", m.start_r_inner_m},
        {"start_r_outer_m", m.start_r_outer_m}}},
      {"predictors",
       {{"knn_k", p.knn_k},
        {"window", p.window},
        {"previous_mode_weight", p.previous_mode_weight},
        {"trajectory_forest", forest_to_json(p.trajectory_forest)},
        {"rsrp_forest", forest_to_json(p.rsrp_forest)},
        {"test_fraction", p.test_fraction},
        {"knn_max_train", p.knn_max_train}}},
      {"ppo", codec::to_json(c.ppo)},
      {"scaling", codec::to_json(c.scaling)},
      {"controllers",
       {{"a3",
         {{"hysteresis_db", k.a3.hysteresis_db},
          {"cio_db", k.a3.cio_db},
          {"cio_pairs", k.a3.cio_pairs},
          {"ttt_ticks", k.a3.ttt_ticks}}},
        {"load_hi", k.load_hi},
        {"rsrp_floor", k.rsrp_floor},
        {"ml_margin_db", k.ml_margin_db},
        {"ahc",
         {{"rsrp_floor", k.ahc.rsrp_floor},
          {"load_max", k.ahc.load_max},
          {"stickiness_db", k.ahc.stickiness_db},
          {"return_guard_ticks", k.ahc.return_guard_ticks}}}}},
      {"rapp",
       {{"period_ticks", c.rapp.period_ticks},
        {"ttl_ticks", c.rapp.ttl_ticks},
        {"mask_radius_factor", c.rapp.mask_radius_factor}}},
      {"sim",
       {{"pingpong_window", c.sim.pingpong_window},
        {"capacity_factor", c.sim.capacity_factor},
        {"l3_filter_k", c.sim.l3_filter_k},
        {"n_runs", c.sim.n_runs},
        {"base_seed", c.sim.base_seed},
        {"workers", c.sim.workers}}},
      {"training",
       {{"trace_files", c.training.trace_files},
        {"trace_seed", c.training.trace_seed},
        {"predictor_seed", c.training.predictor_seed},
        {"policy_episodes", c.training.policy_episodes},
        {"policy_ues", c.training.policy_ues},
        {"policy_seed", c.training.policy_seed}}},
      {"output_dir", c.output_dir}};
}

/// Rejects keys of `in` that the reference document does not have. Arrays
/// are leaves.
void check_known(const json& in, const json& ref, const std::string& path) {
  if (!in.is_object()) return;
  if (!ref.is_object()) throw std::invalid_argument("'" + path + "' must not be an object");
  for (const auto& [key, value] : in.items()) {
    const std::string child = path.empty() ? key : path + "." + key;
    auto it = ref.find(key);
    if (it == ref.end()) throw std::invalid_argument("unknown config key '" + child + "'");
    if (it->is_object() && !value.is_object()) throw std::invalid_argument("'" + child + "' must be an object");
    check_known(value, *it, child);
  }
}

const json* section(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

RunConfig from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  check_known(j, to_json(RunConfig{}), "");
  RunConfig c;
  read(j, "schema_version", c.schema_version);
  if (const json* s = section(j, "topology")) {
    auto& t = c.topology;
    read(*s, "n_cells", t.n_cells);
    read(*s, "ring_radius_m", t.ring_radius_m);
    read(*s, "coverage_radius_m", t.coverage_radius_m);
    read(*s, "tx_power_dbm", t.tx_power_dbm);
    read(*s, "carrier_freq_ghz", t.carrier_freq_ghz);
    read(*s, "bandwidth_hz", t.bandwidth_hz);
    read(*s, "shadowing_sigma_db", t.shadowing_sigma_db);
    read(*s, "noise_figure_db", t.noise_figure_db);
    read(*s, "shadowing_decorrelation_m", t.shadowing_decorrelation_m);
  }
  if (const json* s = section(j, "mobility")) {
    auto& m = c.mobility;
    read(*s, "n_ues", m.n_ues);
    read(*s, "n_ticks", m.n_ticks);
    read(*s, "tick_s", m.tick_s);
    read(*s, "start_r_inner_m", m.start_r_inner_m);
    read(*s, "start_r_outer_m", m.start_r_outer_m);
    for (MobilityMode mode : kAllModes) {
      const std::string name(mode_name(mode));
      const auto idx = static_cast<std::size_t>(mode_index(mode));
      if (const json* mix = section(*s, "mix")) read(*mix, name.c_str(), m.mix[idx]);
      if (const json* prof = section(*s, "profiles"))
        if (const json* p = section(*prof, name.c_str())) profile_from_json(*p, m.profiles[idx]);
    }
    if (const json* a = section(*s, "arena")) {
      read(*a, "x_min", m.arena.x_min);
      read(*a, "x_max", m.arena.x_max);
      read(*a, "y_min", m.arena.y_min);
      read(*a, "y_max", m.arena.y_max);
    }
  }
  if (const json* s = section(j, "predictors")) {
    auto& p = c.predictors;
    read(*s, "knn_k", p.knn_k);
    read(*s, "window", p.window);
    read(*s, "previous_mode_weight", p.previous_mode_weight);
    read(*s, "test_fraction", p.test_fraction);
    read(*s, "knn_max_train", p.knn_max_train);
    if (const json* f = section(*s, "trajectory_forest")) forest_from_json(*f, p.trajectory_forest);
    if (const json* f = section(*s, "rsrp_forest")) forest_from_json(*f, p.rsrp_forest);
  }
  if (const json* s = section(j, "ppo")) codec::from_json(*s, c.ppo);
  if (const json* s = section(j, "scaling")) codec::from_json(*s, c.scaling);
  if (const json* s = section(j, "controllers")) {
    auto& k = c.controllers;
    if (const json* a3 = section(*s, "a3")) {
      read(*a3, "hysteresis_db", k.a3.hysteresis_db);
      read(*a3, "cio_db", k.a3.cio_db);
      read(*a3, "cio_pairs", k.a3.cio_pairs);
      read(*a3, "ttt_ticks", k.a3.ttt_ticks);
    }
    read(*s, "load_hi", k.load_hi);
    read(*s, "rsrp_floor", k.rsrp_floor);
    read(*s, "ml_margin_db", k.ml_margin_db);
    if (const json* g = section(*s, "ahc")) {
      read(*g, "rsrp_floor", k.ahc.rsrp_floor);
      read(*g, "load_max", k.ahc.load_max);
      read(*g, "stickiness_db", k.ahc.stickiness_db);
      read(*g, "return_guard_ticks", k.ahc.return_guard_ticks);
    }
  }
  if (const json* s = section(j, "rapp")) {
    read(*s, "period_ticks", c.rapp.period_ticks);
    read(*s, "ttl_ticks", c.rapp.ttl_ticks);
    read(*s, "mask_radius_factor", c.rapp.mask_radius_factor);
  }
  if (const json* s = section(j, "sim")) {
    read(*s, "pingpong_window", c.sim.pingpong_window);
    read(*s, "capacity_factor", c.sim.capacity_factor);
    read(*s, "l3_filter_k", c.sim.l3_filter_k);
    read(*s, "n_runs", c.sim.n_runs);
    read(*s, "base_seed", c.sim.base_seed);
    read(*s, "workers", c.sim.workers);
  }
  if (const json* s = section(j, "training")) {
    read(*s, "trace_files", c.training.trace_files);
    read(*s, "trace_seed", c.training.trace_seed);
    read(*s, "predictor_seed", c.training.predictor_seed);
    read(*s, "policy_episodes", c.training.policy_episodes);
    read(*s, "policy_ues", c.training.policy_ues);
    read(*s, "policy_seed", c.training.policy_seed);
  }
  read(j, "output_dir", c.output_dir);
  c.validate();
  return c;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string dump_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw std::invalid_argument("override must look like key.path=value: " + std::string(assignment));
  const std::string path(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));

  json doc = to_json(config);
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(key)) throw std::invalid_argument("unknown config key '" + path + "'");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw std::invalid_argument("'" + path + "' is a section, not a value");

  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  const bool both_numbers = node->is_number() && value.is_number();
  if (!both_numbers && node->type() != value.type())
    throw std::invalid_argument("override for '" + path + "' has the wrong type");
  *node = std::move(value);
  config = from_json(doc);
}

}  // namespace ahc
