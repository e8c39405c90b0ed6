#include "ahc/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "ahc/csv.hpp"

namespace ahc {

CampaignResult run_campaign(const CampaignSpec& spec, const SimModels& models) {
  if (spec.controllers.empty()) throw std::invalid_argument("campaign needs at least one controller");
  if (spec.n_runs < 2) throw std::invalid_argument("campaign needs n_runs >= 2 for confidence intervals");
  if (spec.workers < 0) throw std::invalid_argument("workers must be >= 0");
  spec.params.validate();

  const std::size_t n_runs = static_cast<std::size_t>(spec.n_runs);
  const std::size_t n_jobs = spec.controllers.size() * n_runs;
  CampaignResult result;
  result.runs.resize(n_jobs);
  for (std::size_t i = 0; i < n_jobs; ++i) {
    RunRecord& r = result.runs[i];
    r.controller = spec.controllers[i / n_runs];
    r.run = static_cast<int>(i % n_runs);
    r.seed = spec.base_seed + static_cast<std::uint64_t>(r.run);
  }

  std::vector<std::exception_ptr> errors(n_jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_jobs; i = next++) {
      RunRecord& r = result.runs[i];
      try {
        r.kpi = run_simulation(spec.params, r.controller, r.seed, models).kpi;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t n_workers = spec.workers > 0 ? static_cast<std::size_t>(spec.workers)
                                           : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min(n_workers, n_jobs);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t c = 0; c < spec.controllers.size(); ++c) {
    std::vector<KpiRecord> kpis;
    for (std::size_t r = 0; r < n_runs; ++r) kpis.push_back(result.runs[c * n_runs + r].kpi);
    result.summaries.push_back({spec.controllers[c], aggregate_runs(kpis)});
  }
  return result;
}

const ControllerSummary& find_summary(const CampaignResult& result, ControllerKind controller) {
  for (const auto& s : result.summaries)
    if (s.controller == controller) return s;
  throw std::out_of_range("controller not in campaign: " + std::string(controller_name(controller)));
}

void write_summary_csv(std::ostream& out, const CampaignResult& result) {
  out << "controller,kpi,mean,ci_half_width,n_runs\n";
  for (const auto& s : result.summaries)
    for (std::string_view kpi : kSummaryKpis) {
      const CiStat& st = summary_stat(s.aggregate, kpi);
      out << controller_name(s.controller) << ',' << kpi << ',' << format_double(st.mean) << ','
          << format_double(st.half_width) << ',' << st.n << '\n';
    }
}

void write_runs_csv(std::ostream& out, const CampaignResult& result) {
  out << "controller,run,seed,throughput_mbps,handover_rate,pingpong_rate_pct,ho_failure_fraction,"
         "handover_attempts,handover_failures,pingpongs,episode_utility,n_ues,n_ticks\n";
  for (const auto& r : result.runs) {
    const KpiRecord& k = r.kpi;
    out << controller_name(r.controller) << ',' << r.run << ',' << r.seed << ',' << format_double(k.mean_throughput_mbps)
        << ',' << format_double(k.handover_rate) << ',' << format_double(k.pingpong_rate_pct) << ','
        << format_double(k.ho_failure_fraction) << ',' << k.handover_attempts << ',' << k.handover_failures << ','
        << k.pingpongs << ',' << format_double(k.episode_utility) << ',' << k.n_ues << ',' << k.n_ticks << '\n';
  }
}

void write_plot_csv(std::ostream& out, const CampaignResult& result, std::string_view kpi) {
  out << "controller,mean,ci_half_width,ci_lo,ci_hi\n";
  for (const auto& s : result.summaries) {
    const CiStat& st = summary_stat(s.aggregate, kpi);
    out << controller_name(s.controller) << ',' << format_double(st.mean) << ',' << format_double(st.half_width)
        << ',' << format_double(st.lo()) << ',' << format_double(st.hi()) << '\n';
  }
}

}  // namespace ahc
