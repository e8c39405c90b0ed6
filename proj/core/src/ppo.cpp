#include "ahc/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ahc/csv.hpp"
#include "json_codec.hpp"

namespace ahc {

namespace {

Eigen::VectorXd to_vector(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_mask(const ActionMask& mask, std::size_t n) {
  if (mask.size() != n) throw std::invalid_argument("action mask length mismatch");
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; }))
    throw std::invalid_argument("no admissible cell");
}

/// Log-probabilities of the admissible entries (-inf elsewhere).
std::vector<double> masked_log_softmax(std::span<const double> logits, const ActionMask& mask) {
  check_mask(mask, logits.size());
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i]) hi = std::max(hi, logits[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i]) sum += std::exp(logits[i] - hi);
  const double log_z = hi + std::log(sum);
  std::vector<double> out(logits.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i]) out[i] = logits[i] - log_z;
  return out;
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

int sample_action(const std::vector<double>& probs, const ActionMask& mask, RandomStream& stream) {
  const double u = stream.uniform();
  double cum = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!mask[i]) continue;
    last = static_cast<int>(i);
    cum += probs[i];
    if (u < cum) return last;
  }
  return last;
}

}  // namespace

void UtilityWeights::validate() const {
  if (!(alpha >= 0.0 && beta >= 0.0 && gamma_pp >= 0.0))
    throw std::invalid_argument("utility weights alpha, beta, gamma_pp must be >= 0");
  if (!(w_u >= 0.0)) throw std::invalid_argument("utility weight w_u must be >= 0");
  if (!(r_norm_mbps > 0.0)) throw std::invalid_argument("r_norm_mbps must be > 0");
}

void PpoConfig::validate() const {
  if (!(clip > 0.0 && clip < 1.0)) throw std::invalid_argument("ppo clip must be in (0, 1)");
  if (!(discount > 0.0 && discount <= 1.0)) throw std::invalid_argument("ppo discount must be in (0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw std::invalid_argument("gae_lambda must be in [0, 1]");
  if (!(entropy_coef >= 0.0) || !(value_coef >= 0.0))
    throw std::invalid_argument("ppo loss coefficients must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("ppo learning_rate must be > 0");
  if (epochs < 1 || minibatch < 1) throw std::invalid_argument("ppo epochs and minibatch must be >= 1");
  if (scenario_pool < 0) throw std::invalid_argument("ppo scenario_pool must be >= 0");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("ppo hidden sizes must be >= 1");
  reward.validate();
}

std::vector<double> make_policy_state(MobilityMode mode, Vec2 predicted_position,
                                      std::span<const double> predicted_rsrp_dbm, const StateScaling& scaling) {
  std::vector<double> s(policy_state_size(predicted_rsrp_dbm.size()), 0.0);
  s[static_cast<std::size_t>(mode_index(mode))] = 1.0;
  s[kModeCount] = predicted_position.x / scaling.position_scale_m;
  s[kModeCount + 1] = predicted_position.y / scaling.position_scale_m;
  for (std::size_t c = 0; c < predicted_rsrp_dbm.size(); ++c)
    s[kStateRsrpOffset + c] = (predicted_rsrp_dbm[c] - scaling.rsrp_reference_dbm) / scaling.rsrp_scale_db;
  for (double v : s)
    if (!std::isfinite(v)) throw std::invalid_argument("policy state has a non-finite entry");
  return s;
}

namespace {

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

PolicyNet PolicyNet::zeros(int state_dim, int n_actions, const std::vector<int>& hidden, Activation activation) {
  return PolicyNet{Mlp(layer_sizes(state_dim, hidden, n_actions), activation),
                   Mlp(layer_sizes(state_dim, hidden, 1), activation)};
}

PolicyNet PolicyNet::create(int state_dim, int n_actions, const std::vector<int>& hidden, RandomStream& stream,
                            Activation activation) {
  PolicyNet net = zeros(state_dim, n_actions, hidden, activation);
  RandomStream actor_stream = stream.split(0);
  RandomStream critic_stream = stream.split(1);
  net.actor.initialize(actor_stream, 0.01);
  net.critic.initialize(critic_stream, 1.0);
  return net;
}

std::vector<double> masked_softmax(std::span<const double> logits, const ActionMask& mask) {
  std::vector<double> lp = masked_log_softmax(logits, mask);
  std::vector<double> p(lp.size(), 0.0);
  for (std::size_t i = 0; i < lp.size(); ++i)
    if (mask[i]) p[i] = std::exp(lp[i]);
  return p;
}

double masked_log_prob(std::span<const double> logits, const ActionMask& mask, int action) {
  if (action < 0 || static_cast<std::size_t>(action) >= logits.size() || !mask.at(static_cast<std::size_t>(action)))
    throw std::invalid_argument("action is not admissible");
  return masked_log_softmax(logits, mask)[static_cast<std::size_t>(action)];
}

PolicyOutput policy_forward(const PolicyNet& net, std::span<const double> state, const ActionMask& mask) {
  check_mask(mask, static_cast<std::size_t>(net.n_actions()));
  const Eigen::VectorXd x = to_vector(state);
  const Eigen::VectorXd z = net.actor.forward(x);
  PolicyOutput out;
  out.logits.assign(z.data(), z.data() + z.size());
  out.probs = masked_softmax(out.logits, mask);
  out.value = net.critic.forward(x)[0];
  return out;
}

std::vector<RankedCell> rank_cells(const PolicyNet& net, std::span<const double> state, const ActionMask& mask) {
  const PolicyOutput out = policy_forward(net, state, mask);
  const std::size_t n = out.probs.size();
  if (state.size() < kStateRsrpOffset + n) throw std::invalid_argument("policy state too short for ranking");
  std::vector<RankedCell> ranked;
  for (std::size_t c = 0; c < n; ++c)
    if (mask[c]) ranked.push_back({static_cast<int>(c), out.probs[c]});
  std::sort(ranked.begin(), ranked.end(), [&](const RankedCell& a, const RankedCell& b) {
    if (a.score != b.score) return a.score > b.score;
    const double ra = state[kStateRsrpOffset + static_cast<std::size_t>(a.cell_id)];
    const double rb = state[kStateRsrpOffset + static_cast<std::size_t>(b.cell_id)];
    if (ra != rb) return ra > rb;
    return a.cell_id < b.cell_id;
  });
  return ranked;
}

GaeResult compute_gae(std::span<const Transition> trajectory, double bootstrap_value, double discount,
                      double lambda) {
  if (trajectory.empty()) throw std::invalid_argument("empty trajectory");
  const std::size_t n = trajectory.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_value = bootstrap_value;
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const Transition& tr = trajectory[i];
    const double live = tr.done ? 0.0 : 1.0;
    const double delta = tr.reward + discount * next_value * live - tr.value;
    next_adv = delta + discount * lambda * live * next_adv;
    out.advantages[i] = next_adv;
    out.returns[i] = next_adv + tr.value;
    next_value = tr.value;
  }
  return out;
}

void normalize_advantages(std::span<double> advantages) {
  if (advantages.empty()) return;
  const double n = static_cast<double>(advantages.size());
  const double mean = std::accumulate(advantages.begin(), advantages.end(), 0.0) / n;
  double var = 0.0;
  for (double a : advantages) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / n);
  const bool flat = sd <= 1e-12 * std::max(1.0, std::abs(mean));
  for (double& a : advantages) a = flat ? 0.0 : (a - mean) / (sd + 1e-8);
}

double clipped_surrogate(double ratio, double advantage, double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

LossTerms ppo_loss(const PolicyNet& net, std::span<const TrainingSample> batch, const PpoConfig& config,
                   Eigen::VectorXd* actor_grad, Eigen::VectorXd* critic_grad) {
  if (batch.empty()) throw std::invalid_argument("empty PPO batch");
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const bool want_grad = actor_grad != nullptr || critic_grad != nullptr;
  if (actor_grad) *actor_grad = Eigen::VectorXd::Zero(net.actor.params().size());
  if (critic_grad) *critic_grad = Eigen::VectorXd::Zero(net.critic.params().size());

  LossTerms loss;
  Mlp::Cache actor_cache, critic_cache;
  const auto n_actions = static_cast<std::size_t>(net.n_actions());
  for (const TrainingSample& s : batch) {
    check_mask(s.mask, n_actions);
    const Eigen::VectorXd x = to_vector(s.state);
    const Eigen::VectorXd z = net.actor.forward(x, actor_cache);
    const std::vector<double> logits(z.data(), z.data() + z.size());
    const std::vector<double> logp = masked_log_softmax(logits, s.mask);
    const auto a = static_cast<std::size_t>(s.action);
    if (a >= n_actions || !s.mask[a]) throw std::invalid_argument("sample action is not admissible");

    const double ratio = std::exp(logp[a] - s.old_log_prob);
    const double unclipped = ratio * s.advantage;
    const double clipped = std::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip) * s.advantage;
    const bool clip_binds = clipped < unclipped;
    loss.surrogate += std::min(unclipped, clipped) * inv_b;
    if (std::abs(ratio - 1.0) > config.clip) loss.clip_fraction += inv_b;
    loss.approx_kl += (s.old_log_prob - logp[a]) * inv_b;

    double entropy = 0.0;
    for (std::size_t j = 0; j < n_actions; ++j)
      if (s.mask[j] && std::isfinite(logp[j])) entropy -= std::exp(logp[j]) * logp[j];
    loss.entropy += entropy * inv_b;

    const double value = net.critic.forward(x, critic_cache)[0];
    const double err = value - s.ret;
    loss.value_loss += err * err * inv_b;

    if (!want_grad) continue;
    if (actor_grad) {
      Eigen::VectorXd dz = Eigen::VectorXd::Zero(z.size());
      for (std::size_t j = 0; j < n_actions; ++j) {
        if (!s.mask[j]) continue;
        const double p = std::exp(logp[j]);
        const double indicator = (j == a) ? 1.0 : 0.0;
        double g = 0.0;
        if (!clip_binds) g -= inv_b * unclipped * (indicator - p);
        if (p > 0.0) g += config.entropy_coef * inv_b * p * (logp[j] + entropy);
        dz[static_cast<Eigen::Index>(j)] = g;
      }
      net.actor.backward(actor_cache, dz, *actor_grad);
    }
    if (critic_grad) {
      Eigen::VectorXd dv(1);
      dv[0] = 2.0 * config.value_coef * err * inv_b;
      net.critic.backward(critic_cache, dv, *critic_grad);
    }
  }
  loss.total = -loss.surrogate - config.entropy_coef * loss.entropy + config.value_coef * loss.value_loss;
  return loss;
}

PpoLearner::PpoLearner(PolicyNet net, PpoConfig config)
    : net_(std::move(net)),
      config_(std::move(config)),
      actor_opt_(net_.actor.params().size(), config_.learning_rate),
      critic_opt_(net_.critic.params().size(), config_.learning_rate) {
  config_.validate();
}

UpdateStats PpoLearner::update(std::span<const TrainingSample> batch, RandomStream& stream) {
  if (batch.empty()) throw std::invalid_argument("empty PPO batch");
  const PolicyNet snapshot = net_;
  const Adam actor_snapshot = actor_opt_;
  const Adam critic_snapshot = critic_opt_;
  auto abort = [&](UpdateStats& stats, std::string message) {
    net_ = snapshot;
    actor_opt_ = actor_snapshot;
    critic_opt_ = critic_snapshot;
    stats.aborted = true;
    stats.message = std::move(message);
    return stats;
  };

  UpdateStats stats;
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TrainingSample> mb;
  Eigen::VectorXd ga, gc;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[stream.index(i)]);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config_.minibatch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config_.minibatch));
      mb.clear();
      for (std::size_t k = start; k < end; ++k) mb.push_back(batch[order[k]]);
      const LossTerms loss = ppo_loss(net_, mb, config_, &ga, &gc);
      if (!std::isfinite(loss.total)) return abort(stats, "non-finite loss");
      if (!all_finite(ga) || !all_finite(gc)) return abort(stats, "non-finite gradient");
      if (config_.max_grad_norm > 0.0) {
        // Per network: the critic's gradient scales with the return and
        // would otherwise swamp the actor's share of a joint norm.
        for (Eigen::VectorXd* g : {&ga, &gc}) {
          const double norm = g->norm();
          if (norm > config_.max_grad_norm) *g *= config_.max_grad_norm / norm;
        }
      }
      actor_opt_.step(net_.actor.params(), ga);
      critic_opt_.step(net_.critic.params(), gc);
      if (!all_finite(net_.actor.params()) || !all_finite(net_.critic.params()))
        return abort(stats, "non-finite parameters");

      stats.mean.total += loss.total;
      stats.mean.surrogate += loss.surrogate;
      stats.mean.value_loss += loss.value_loss;
      stats.mean.entropy += loss.entropy;
      stats.mean.clip_fraction += loss.clip_fraction;
      stats.mean.approx_kl += loss.approx_kl;
      ++stats.steps;
    }
  }
  const double inv = 1.0 / stats.steps;
  stats.mean.total *= inv;
  stats.mean.surrogate *= inv;
  stats.mean.value_loss *= inv;
  stats.mean.entropy *= inv;
  stats.mean.clip_fraction *= inv;
  stats.mean.approx_kl *= inv;
  return stats;
}

BanditEnv::BanditEnv(std::vector<double> rewards, std::size_t n_agents, int horizon, std::size_t state_dim)
    : rewards_(std::move(rewards)), n_agents_(n_agents), horizon_(horizon), state_dim_(state_dim) {
  if (rewards_.empty() || n_agents_ == 0 || horizon_ < 1 || state_dim_ == 0)
    throw std::invalid_argument("bandit needs actions, agents, a horizon and a state");
}

Observation BanditEnv::observation() const {
  return Observation{std::vector<double>(state_dim_, 1.0), ActionMask(rewards_.size(), true)};
}

std::vector<Observation> BanditEnv::reset(std::uint64_t /*seed*/) {
  t_ = 0;
  return std::vector<Observation>(n_agents_, observation());
}

StepOutcome BanditEnv::step(std::span<const int> actions) {
  if (actions.size() != n_agents_) throw std::invalid_argument("bandit action count mismatch");
  StepOutcome out;
  for (int a : actions) out.rewards.push_back(rewards_.at(static_cast<std::size_t>(a)));
  ++t_;
  out.done = t_ >= horizon_;
  if (!out.done) out.next.assign(n_agents_, observation());
  return out;
}

namespace {

class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  double stddev() const { return n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace

PolicyTrainResult train_policy(PolicyEnv& env, const PpoConfig& config, int n_episodes, std::uint64_t seed,
                               const PolicyNet* initial, const EpisodeCallback& on_episode) {
  config.validate();
  if (n_episodes < 0) throw std::invalid_argument("n_episodes must be >= 0");
  const RandomStream root(seed);
  const auto state_dim = static_cast<int>(env.state_dim());
  const auto n_actions = static_cast<int>(env.n_actions());
  PolicyNet net;
  if (initial) {
    if (initial->state_dim() != state_dim || initial->n_actions() != n_actions)
      throw std::invalid_argument("initial policy does not match the environment");
    net = *initial;
  } else {
    RandomStream init = root.split(0);
    net = PolicyNet::create(state_dim, n_actions, config.hidden, init);
  }
  PpoLearner learner(std::move(net), config);

  PolicyTrainResult result;
  RunningStats return_stats;
  constexpr int kMaxSteps = 1'000'000;
  for (int ep = 0; ep < n_episodes; ++ep) {
    RandomStream stream = root.split(1 + static_cast<std::uint64_t>(ep));
    const int scenario = config.scenario_pool > 0 ? ep % config.scenario_pool : ep;
    std::vector<Observation> obs = env.reset(mix_seed(seed, 0x5eed0000ULL + static_cast<std::uint64_t>(scenario)));
    const std::size_t n_agents = obs.size();
    if (n_agents == 0) throw std::runtime_error("environment reset returned no agents");
    std::vector<std::vector<Transition>> traj(n_agents);
    std::vector<int> actions(n_agents);
    double total_reward = 0.0;
    for (int step = 0;; ++step) {
      if (step >= kMaxSteps) throw std::runtime_error("environment did not terminate");
      for (std::size_t i = 0; i < n_agents; ++i) {
        const PolicyOutput out = policy_forward(learner.net(), obs[i].state, obs[i].mask);
        const int a = sample_action(out.probs, obs[i].mask, stream);
        actions[i] = a;
        Transition tr;
        tr.state = std::move(obs[i].state);
        tr.mask = std::move(obs[i].mask);
        tr.action = a;
        tr.log_prob = std::log(out.probs[static_cast<std::size_t>(a)]);
        tr.value = out.value;
        traj[i].push_back(std::move(tr));
      }
      StepOutcome outcome = env.step(actions);
      if (outcome.rewards.size() != n_agents) throw std::runtime_error("environment returned a wrong reward count");
      for (std::size_t i = 0; i < n_agents; ++i) {
        traj[i].back().reward = outcome.rewards[i];
        traj[i].back().done = outcome.done;
        total_reward += outcome.rewards[i];
      }
      if (outcome.done) break;
      if (outcome.next.size() != n_agents) throw std::runtime_error("environment returned a wrong agent count");
      obs = std::move(outcome.next);
    }

    if (config.normalize_returns) {
      for (const auto& t : traj) {
        double g = 0.0;
        for (auto it = t.rbegin(); it != t.rend(); ++it) {
          g = it->reward + config.discount * (it->done ? 0.0 : g);
          return_stats.add(g);
        }
      }
      const double sd = return_stats.stddev();
      if (sd > 1e-8)
        for (auto& t : traj)
          for (Transition& tr : t) tr.reward /= sd;
    }

    std::vector<TrainingSample> samples;
    for (const auto& t : traj) {
      const GaeResult gae = compute_gae(t, 0.0, config.discount, config.gae_lambda);
      for (std::size_t k = 0; k < t.size(); ++k)
        samples.push_back({t[k].state, t[k].mask, t[k].action, t[k].log_prob, gae.advantages[k], gae.returns[k]});
    }
    std::vector<double> adv(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) adv[k] = samples[k].advantage;
    normalize_advantages(adv);
    for (std::size_t k = 0; k < samples.size(); ++k) samples[k].advantage = adv[k];

    const UpdateStats stats = learner.update(samples, stream);
    CurveRow row;
    row.episode = ep;
    row.mean_reward = total_reward / static_cast<double>(n_agents);
    row.surrogate_abs = std::abs(stats.mean.surrogate);
    row.value_loss = stats.mean.value_loss;
    row.entropy = stats.mean.entropy;
    row.approx_kl = stats.mean.approx_kl;
    row.aborted = stats.aborted;
    result.curve.push_back(row);
    if (on_episode) on_episode(row, learner.net());
  }
  result.net = learner.net();
  return result;
}

void write_curve_csv(std::span<const CurveRow> curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "episode,mean_reward,surrogate_abs,value_loss,entropy,approx_kl,aborted\n";
  for (const CurveRow& r : curve)
    out << r.episode << ',' << format_double(r.mean_reward) << ',' << format_double(r.surrogate_abs) << ','
        << format_double(r.value_loss) << ',' << format_double(r.entropy) << ',' << format_double(r.approx_kl)
        << ',' << (r.aborted ? 1 : 0) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

namespace {

codec::json mlp_to_json(const Mlp& m) {
  const auto& p = m.params();
  return {{"sizes", m.sizes()},
          {"activation", std::string(activation_name(m.activation()))},
          {"params", std::vector<double>(p.data(), p.data() + p.size())}};
}

Mlp mlp_from_json(const codec::json& j) {
  Mlp m(j.at("sizes").get<std::vector<int>>(), parse_activation(j.at("activation").get<std::string>()));
  const auto params = j.at("params").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(params.size()) != m.params().size())
    throw std::runtime_error("policy checkpoint parameter count mismatch");
  m.params() = Eigen::Map<const Eigen::VectorXd>(params.data(), static_cast<Eigen::Index>(params.size()));
  return m;
}

constexpr int kPolicyFormatVersion = 1;

}  // namespace

void save_policy(const std::filesystem::path& path, const PolicyCheckpoint& checkpoint) {
  const codec::json j = {{"format", "ahc-policy"},
                         {"format_version", kPolicyFormatVersion},
                         {"config", codec::to_json(checkpoint.config)},
                         {"scaling", codec::to_json(checkpoint.scaling)},
                         {"actor", mlp_to_json(checkpoint.net.actor)},
                         {"critic", mlp_to_json(checkpoint.net.critic)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

PolicyCheckpoint load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open policy checkpoint " + path.string());
  try {
    const codec::json j = codec::json::parse(in);
    if (j.at("format").get<std::string>() != "ahc-policy") throw std::runtime_error("not a policy checkpoint");
    const int version = j.at("format_version").get<int>();
    if (version != kPolicyFormatVersion)
      throw std::runtime_error("unsupported policy checkpoint version " + std::to_string(version));
    PolicyCheckpoint cp;
    codec::from_json(j.at("config"), cp.config);
    codec::from_json(j.at("scaling"), cp.scaling);
    cp.net.actor = mlp_from_json(j.at("actor"));
    cp.net.critic = mlp_from_json(j.at("critic"));
    if (cp.net.critic.output_size() != 1 || cp.net.critic.input_size() != cp.net.actor.input_size())
      throw std::runtime_error("inconsistent actor/critic shapes");
    return cp;
  } catch (const codec::json::exception& e) {
    throw std::runtime_error("corrupt policy checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace ahc
