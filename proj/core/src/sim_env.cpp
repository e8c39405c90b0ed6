#include "ahc/sim_env.hpp"

#include <stdexcept>

namespace ahc {

SimPolicyEnv::SimPolicyEnv(SimParams params, const PredictorBundle& predictors, StateScaling scaling)
    : params_(std::move(params)), predictors_(predictors), scaling_(scaling) {
  params_.validate();
  const int n_cells = static_cast<int>(params_.topology.size());
  placeholder_ = PolicyNet::zeros(static_cast<int>(policy_state_size(params_.topology.size())), n_cells, {});
}

std::vector<Observation> SimPolicyEnv::advance(std::vector<double>& rewards) {
  const std::size_t n = sim_->n_ues();
  rewards.assign(n, 0.0);
  std::vector<Observation> obs;
  for (;;) {
    if (pending_ == nullptr) {
      if (sim_->finished()) return obs;
      pending_ = &sim_->begin_tick();
      if (!pending_->empty()) {
        if (pending_->size() != n) throw std::runtime_error("rApp skipped UEs; increase the history length");
        for (const RappDecision& d : *pending_) obs.push_back(Observation{d.state, d.mask});
        return obs;
      }
    }
    sim_->end_tick();
    pending_ = nullptr;
    const auto& u = sim_->last_utility();
    for (std::size_t i = 0; i < n; ++i) rewards[i] += u[i];
  }
}

std::vector<Observation> SimPolicyEnv::reset(std::uint64_t seed) {
  SimModels models{&predictors_, &placeholder_, scaling_};
  sim_ = std::make_unique<Simulation>(params_, ControllerKind::kAhc, seed, models);
  pending_ = nullptr;
  std::vector<double> unused;
  auto obs = advance(unused);
  if (obs.empty()) throw std::runtime_error("episode has no rApp period");
  return obs;
}

StepOutcome SimPolicyEnv::step(std::span<const int> actions) {
  if (!sim_ || pending_ == nullptr) throw std::logic_error("step called without a pending observation");
  if (actions.size() != pending_->size()) throw std::invalid_argument("one action per UE is required");
  for (std::size_t i = 0; i < actions.size(); ++i) {
    RappDecision& d = (*pending_)[i];
    d.ranking.candidates = {RankedCell{actions[i], 1.0}};
  }
  sim_->end_tick();
  std::vector<double> rewards(sim_->n_ues(), 0.0);
  {
    const auto& u = sim_->last_utility();
    for (std::size_t i = 0; i < rewards.size(); ++i) rewards[i] += u[i];
  }
  pending_ = nullptr;
  std::vector<double> more;
  StepOutcome out;
  out.next = advance(more);
  for (std::size_t i = 0; i < rewards.size(); ++i) rewards[i] += more[i];
  out.rewards = std::move(rewards);
  out.done = out.next.empty();
  return out;
}

}  // namespace ahc
