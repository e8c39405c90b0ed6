#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "ahc/kpi.hpp"
#include "ahc/simulation.hpp"

namespace ahc {

struct CampaignSpec {
  SimParams params;
  std::vector<ControllerKind> controllers;
  int n_runs = 10;
  std::uint64_t base_seed = 1;  // run r uses base_seed + r for every controller
  int workers = 0;              // 0 = hardware concurrency
};

struct RunRecord {
  ControllerKind controller = ControllerKind::kA3;
  int run = 0;
  std::uint64_t seed = 0;
  KpiRecord kpi;
};

struct ControllerSummary {
  ControllerKind controller = ControllerKind::kA3;
  KpiAggregate aggregate;
};

struct CampaignResult {
  std::vector<RunRecord> runs;  // controller-major, then run index
  std::vector<ControllerSummary> summaries;
};

/// Runs every (controller, run) pair on a worker pool. Results are stored by
/// job index, so output does not depend on scheduling. Requires n_runs >= 2
/// for the confidence intervals.
CampaignResult run_campaign(const CampaignSpec& spec, const SimModels& models);

/// controller,kpi,mean,ci_half_width,n_runs
void write_summary_csv(std::ostream& out, const CampaignResult& result);
/// controller,run,seed followed by every KpiRecord field.
void write_runs_csv(std::ostream& out, const CampaignResult& result);
/// controller,mean,ci_half_width,ci_lo,ci_hi for one KPI.
void write_plot_csv(std::ostream& out, const CampaignResult& result, std::string_view kpi);

/// Indexes into `summaries`; throws std::out_of_range for an absent controller.
const ControllerSummary& find_summary(const CampaignResult& result, ControllerKind controller);

}  // namespace ahc
