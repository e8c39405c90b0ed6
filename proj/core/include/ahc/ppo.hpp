#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ahc/geometry.hpp"
#include "ahc/mlp.hpp"
#include "ahc/mobility.hpp"
#include "ahc/rng.hpp"
#include "ahc/utility.hpp"

namespace ahc {

struct PpoConfig {
  bool operator==(const PpoConfig&) const = default;

  double clip = 0.2;
  double discount = 0.99;
  double gae_lambda = 0.95;
  double entropy_coef = 0.01;
  double value_coef = 0.5;
  double learning_rate = 3e-4;
  int epochs = 4;
  int minibatch = 64;
  double max_grad_norm = 0.5;  // <= 0 disables clipping
  std::vector<int> hidden{64, 64};
  UtilityWeights reward{};
  /// Episode e resets the environment with scenario e mod scenario_pool;
  /// 0 draws a fresh scenario every episode.
  int scenario_pool = 10;
  /// Divide rewards by the running std of discounted returns before GAE so
  /// the critic's targets stay O(1).
  bool normalize_returns = true;

  void validate() const;
};

/// Policy-state layout: one-hot mode, predicted position, predicted RSRP.
struct StateScaling {
  bool operator==(const StateScaling&) const = default;

  double position_scale_m = 1000.0;
  double rsrp_reference_dbm = -80.0;
  double rsrp_scale_db = 20.0;
};

inline std::size_t policy_state_size(std::size_t n_cells) { return kModeCount + 2 + n_cells; }
inline constexpr std::size_t kStateRsrpOffset = kModeCount + 2;

std::vector<double> make_policy_state(MobilityMode mode, Vec2 predicted_position,
                                      std::span<const double> predicted_rsrp_dbm,
                                      const StateScaling& scaling = {});

using ActionMask = std::vector<bool>;

struct PolicyNet {
  Mlp actor;   // state -> one logit per cell
  Mlp critic;  // state -> V(s)

  /// Zero-initialized (uniform policy, zero value).
  static PolicyNet zeros(int state_dim, int n_actions, const std::vector<int>& hidden,
                         Activation activation = Activation::kTanh);
  static PolicyNet create(int state_dim, int n_actions, const std::vector<int>& hidden,
                          RandomStream& stream, Activation activation = Activation::kTanh);

  int state_dim() const { return actor.input_size(); }
  int n_actions() const { return actor.output_size(); }
};

/// Softmax restricted to admissible entries; masked entries get exactly 0.
/// Throws std::invalid_argument("no admissible cell") for an all-false mask.
std::vector<double> masked_softmax(std::span<const double> logits, const ActionMask& mask);

struct PolicyOutput {
  std::vector<double> logits;
  std::vector<double> probs;
  double value = 0.0;
};

PolicyOutput policy_forward(const PolicyNet& net, std::span<const double> state, const ActionMask& mask);

/// log pi(action) under the masked softmax.
double masked_log_prob(std::span<const double> logits, const ActionMask& mask, int action);

struct RankedCell {
  int cell_id = 0;
  double score = 0.0;
};

/// Admissible cells by descending probability; ties go to the higher
/// predicted RSRP (read from the state's RSRP block), then the lower id.
std::vector<RankedCell> rank_cells(const PolicyNet& net, std::span<const double> state, const ActionMask& mask);

struct Transition {
  std::vector<double> state;
  ActionMask mask;
  int action = 0;
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
};

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Generalized advantage estimation over one time-ordered trajectory.
/// Advantages are not normalized here; see normalize_advantages.
GaeResult compute_gae(std::span<const Transition> trajectory, double bootstrap_value, double discount,
                      double lambda);

/// In place: zero mean, unit std (a zero-spread batch becomes all zeros).
void normalize_advantages(std::span<double> advantages);

/// min(ratio*A, clip(ratio, 1-eps, 1+eps)*A)
double clipped_surrogate(double ratio, double advantage, double clip);

struct TrainingSample {
  std::vector<double> state;
  ActionMask mask;
  int action = 0;
  double old_log_prob = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
};

struct LossTerms {
  double total = 0.0;      // -surrogate - entropy_coef*entropy + value_coef*value_loss
  double surrogate = 0.0;  // batch mean of the clipped surrogate
  double value_loss = 0.0; // batch mean of (V - return)^2
  double entropy = 0.0;    // batch mean policy entropy
  double clip_fraction = 0.0;
  double approx_kl = 0.0;  // mean(old_log_prob - new_log_prob)
};

/// Loss over a minibatch. When gradient pointers are given, dLoss/dparams of
/// the actor and critic are written to them.
LossTerms ppo_loss(const PolicyNet& net, std::span<const TrainingSample> batch, const PpoConfig& config,
                   Eigen::VectorXd* actor_grad = nullptr, Eigen::VectorXd* critic_grad = nullptr);

struct UpdateStats {
  LossTerms mean;  // averaged over every minibatch step
  int steps = 0;
  bool aborted = false;
  std::string message;
};

/// Owns the network and its optimizer state between updates.
class PpoLearner {
 public:
  PpoLearner(PolicyNet net, PpoConfig config);

  /// `epochs` passes over shuffled minibatches. A non-finite loss, gradient
  /// or parameter restores the pre-update network and reports the abort.
  UpdateStats update(std::span<const TrainingSample> batch, RandomStream& stream);

  const PolicyNet& net() const { return net_; }
  const PpoConfig& config() const { return config_; }

 private:
  PolicyNet net_;
  PpoConfig config_;
  Adam actor_opt_;
  Adam critic_opt_;
};

struct Observation {
  std::vector<double> state;
  ActionMask mask;
};

struct StepOutcome {
  std::vector<double> rewards;  // one per agent
  std::vector<Observation> next;
  bool done = false;
};

/// Multi-agent episodic environment; every agent acts on every step and all
/// agents terminate together.
class PolicyEnv {
 public:
  virtual ~PolicyEnv() = default;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t n_actions() const = 0;
  virtual std::vector<Observation> reset(std::uint64_t seed) = 0;
  virtual StepOutcome step(std::span<const int> actions) = 0;
};

/// Stateless bandit: constant state, every action a pays rewards[a].
class BanditEnv final : public PolicyEnv {
 public:
  BanditEnv(std::vector<double> rewards, std::size_t n_agents, int horizon, std::size_t state_dim = 2);

  std::size_t state_dim() const override { return state_dim_; }
  std::size_t n_actions() const override { return rewards_.size(); }
  std::vector<Observation> reset(std::uint64_t seed) override;
  StepOutcome step(std::span<const int> actions) override;

 private:
  Observation observation() const;

  std::vector<double> rewards_;
  std::size_t n_agents_;
  int horizon_;
  std::size_t state_dim_;
  int t_ = 0;
};

struct CurveRow {
  int episode = 0;
  double mean_reward = 0.0;  // per-agent episode return, averaged over agents
  double surrogate_abs = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  bool aborted = false;
};

struct PolicyTrainResult {
  PolicyNet net;
  std::vector<CurveRow> curve;
};

using EpisodeCallback = std::function<void(const CurveRow&, const PolicyNet&)>;

/// One rollout and one PPO update per episode. Deterministic given `seed`.
/// When `initial` is null the network is freshly initialized from `seed`.
PolicyTrainResult train_policy(PolicyEnv& env, const PpoConfig& config, int n_episodes, std::uint64_t seed,
                               const PolicyNet* initial = nullptr, const EpisodeCallback& on_episode = {});

void write_curve_csv(std::span<const CurveRow> curve, const std::filesystem::path& path);

struct PolicyCheckpoint {
  PolicyNet net;
  PpoConfig config;
  StateScaling scaling;
};

/// Versioned JSON checkpoint holding the network, its PPO config and the
/// state scaling. Throws std::runtime_error on I/O or format errors.
void save_policy(const std::filesystem::path& path, const PolicyCheckpoint& checkpoint);
PolicyCheckpoint load_policy(const std::filesystem::path& path);

}  // namespace ahc
