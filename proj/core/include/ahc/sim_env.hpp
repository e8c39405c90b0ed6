#pragma once

#include <memory>

#include "ahc/ppo.hpp"
#include "ahc/simulation.hpp"

namespace ahc {

/// The simulator seen as a PPO environment. Agents are UEs; one step spans
/// one rApp period. The sampled cell becomes the UE's whole A1 ranking, the
/// AHC xApp executes it subject to its guards (a rejected target means the
/// UE stays), and the reward is the UE's utility summed over the period.
class SimPolicyEnv final : public PolicyEnv {
 public:
  SimPolicyEnv(SimParams params, const PredictorBundle& predictors, StateScaling scaling);

  std::size_t state_dim() const override { return policy_state_size(params_.topology.size()); }
  std::size_t n_actions() const override { return params_.topology.size(); }
  std::vector<Observation> reset(std::uint64_t seed) override;
  StepOutcome step(std::span<const int> actions) override;

 private:
  /// Runs ticks until the next rApp tick (observations) or the end.
  std::vector<Observation> advance(std::vector<double>& rewards);

  SimParams params_;
  const PredictorBundle& predictors_;
  StateScaling scaling_;
  PolicyNet placeholder_;  // ranks before the override; never trained
  std::unique_ptr<Simulation> sim_;
  std::vector<RappDecision>* pending_ = nullptr;
};

}  // namespace ahc
