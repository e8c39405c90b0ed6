#pragma once
// Brute-force reference implementations, written independently of the
// library code they check. Shared by the unit tests and the acceptance run.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ahc/controllers.hpp"
#include "ahc/kpi.hpp"
#include "ahc/mobility.hpp"
#include "ahc/ppo.hpp"

namespace ahc::oracle {

struct SuiteResult {
  std::size_t cases = 0;
  std::size_t mismatches = 0;
  std::string first_failure;

  bool passed() const { return cases > 0 && mismatches == 0; }
};

/// Population z-score, full sort by (distance, index), then majority, mean
/// distance, lowest mode index.
MobilityMode knn_classify(const std::vector<std::vector<double>>& train, const std::vector<MobilityMode>& labels,
                          int k, const std::vector<double>& query);

/// Decisions of an A3 controller that resets its timers and moves to the
/// target after every handover. Decision at tick t is found by re-checking
/// the last ttt ticks of the window since the most recent reset.
struct A3Step {
  bool handover = false;
  int target = -1;
  int serving = 0;  // serving cell when the decision was taken
};
std::vector<A3Step> a3_enumerate(const A3Config& config, int initial_serving,
                                 const std::vector<std::vector<double>>& rsrp_by_tick);

/// Ping-pong flags by scanning every earlier event of the same UE.
std::vector<bool> pingpong_scan(std::span<const HoEvent> events, int window_ticks);

/// Advantages from the explicit sum over future TD residuals.
std::vector<double> gae_unrolled(std::span<const Transition> trajectory, double bootstrap_value, double discount,
                                 double lambda);

/// Norm-wise relative error ||a - n|| / max(||a||, ||n||) between `analytic`
/// and central differences `n` of `loss` over every entry of `params`.
double fd_relative_error(Eigen::VectorXd& params, const Eigen::VectorXd& analytic, const std::function<double()>& loss,
                         double h = 1e-5);

/// Worst finite-difference error of each loss term taken alone, over a
/// 2-state 2-action toy net and a masked 9-state 6-action net.
struct GradientCheck {
  double actor_surrogate = 0.0;
  double entropy = 0.0;
  double critic = 0.0;
  double worst() const { return std::max({actor_surrogate, entropy, critic}); }
};
GradientCheck gradient_check(std::uint64_t seed);

SuiteResult knn_suite(std::uint64_t seed);             // 500 training points, 100 queries
SuiteResult a3_ttt_suite(std::uint64_t seed, int n_sequences);
SuiteResult pingpong_suite(std::uint64_t seed, int n_logs);
SuiteResult gae_suite();                               // hand fixtures plus random unrolled checks
SuiteResult ci_suite();                                // {1,2,3,4} and degenerate cases
SuiteResult forest_split_suite();                      // 4-point fixture vs exhaustive search

}  // namespace ahc::oracle
