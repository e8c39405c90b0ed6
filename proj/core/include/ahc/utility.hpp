#pragma once

namespace ahc {

/// Per-UE-per-tick utility alpha*w*R/R_norm - beta*H - gamma_pp*PP.
struct UtilityWeights {
  bool operator==(const UtilityWeights&) const = default;

  double alpha = 1.0;
  double beta = 0.5;
  double gamma_pp = 1.0;
  double w_u = 1.0;
  double r_norm_mbps = 100.0;

  void validate() const;
  double per_tick(double throughput_mbps, bool handover, bool pingpong) const {
    return alpha * w_u * throughput_mbps / r_norm_mbps - beta * (handover ? 1.0 : 0.0) -
           gamma_pp * (pingpong ? 1.0 : 0.0);
  }
};

}  // namespace ahc
