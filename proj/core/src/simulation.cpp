#include "ahc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "ahc/csv.hpp"

namespace ahc {

int SimParams::capacity() const {
  return static_cast<int>(std::ceil(capacity_factor * population.n_ues / static_cast<double>(topology.size())));
}

void SimParams::validate() const {
  topology.validate();
  population.validate();
  controllers.validate();
  utility.validate();
  if (rapp.period_ticks < 1) throw std::invalid_argument("rapp period must be >= 1");
  if (rapp.ttl_ticks < 0) throw std::invalid_argument("rapp ttl must be >= 0");
  if (!(rapp.mask_radius_factor >= 0.0)) throw std::invalid_argument("mask radius factor must be >= 0");
  if (pingpong_window < 0) throw std::invalid_argument("ping-pong window must be >= 0");
  if (!(capacity_factor > 0.0)) throw std::invalid_argument("capacity factor must be > 0");
  if (l3_filter_k < 0 || l3_filter_k > 19) throw std::invalid_argument("l3_filter_k must be in [0, 19]");
  if (static_cast<long long>(capacity()) * static_cast<long long>(topology.size()) < population.n_ues)
    throw std::invalid_argument("total cell capacity is below the number of UEs");
}

int Simulation::history_ticks(const SimModels& models) {
  const int window = models.predictors ? models.predictors->classifier.window : 0;
  return std::max(window, 2) + 1;
}

Simulation::Simulation(const SimParams& params, ControllerKind kind, std::uint64_t seed, const SimModels& models,
                       bool record_ticks, std::ostream* message_log)
    : params_(params),
      kind_(kind),
      models_(models),
      record_(record_ticks),
      log_(message_log),
      pingpong_(params.pingpong_window) {
  params_.population.history_ticks = history_ticks(models);
  params_.validate();
  traces_ = generate_population(params_.population, mix_seed(seed, 1));
  start(seed);
}

Simulation::Simulation(const SimParams& params, ControllerKind kind, std::uint64_t seed, const SimModels& models,
                       std::vector<Trace> traces, bool record_ticks, std::ostream* message_log)
    : params_(params),
      kind_(kind),
      models_(models),
      record_(record_ticks),
      log_(message_log),
      pingpong_(params.pingpong_window) {
  params_.population.history_ticks = history_ticks(models);
  params_.validate();
  if (traces.size() != static_cast<std::size_t>(params_.population.n_ues))
    throw std::invalid_argument("trace count does not match n_ues");
  const auto need = static_cast<std::size_t>(params_.population.history_ticks + params_.population.n_ticks);
  for (const Trace& t : traces)
    if (t.samples.size() < need) throw std::invalid_argument("trace is shorter than history plus n_ticks");
  traces_ = std::move(traces);
  start(seed);
}

void Simulation::start(std::uint64_t seed) {
  if ((kind_ == ControllerKind::kAhc || kind_ == ControllerKind::kMlAssisted) && models_.predictors == nullptr)
    throw std::invalid_argument(std::string(controller_name(kind_)) + " needs trained predictors");
  if (kind_ == ControllerKind::kAhc && models_.policy == nullptr)
    throw std::invalid_argument("ahc needs a trained policy");
  if (models_.policy && models_.policy->n_actions() != static_cast<int>(params_.topology.size()))
    throw std::invalid_argument("policy action count does not match the topology");

  n_ticks_ = params_.population.n_ticks;
  history_ = params_.population.history_ticks;
  capacity_ = params_.capacity();

  const RandomStream root(seed);
  const std::size_t n = traces_.size();
  const std::size_t n_cells = params_.topology.size();
  const RandomStream shadow_root = root.split(2);
  serving_.assign(n, -1);
  last_ho_.assign(n, std::nullopt);
  attached_.assign(n_cells, 0);
  timers_.assign(n, A3TimerState(n_cells));
  rsrp_.resize(n);
  measured_.resize(n);
  predicted_.resize(n);
  last_utility_.assign(n, 0.0);

  // Channel at tick -1 and initial attach: strongest cell with room.
  const auto idx = static_cast<std::size_t>(history_ - 1);
  for (std::size_t u = 0; u < n; ++u) {
    shadow_streams_.push_back(shadow_root.split(u));
    shadowing_.emplace_back(shadow_streams_.back(), params_.topology.shadowing_sigma_db, n_cells,
                            params_.topology.shadowing_decorrelation_m);
    rsrp_[u] = rsrp(params_.topology, traces_[u].samples[idx].position, shadowing_[u].values());
    measured_[u] = rsrp_[u];
    std::vector<int> order(n_cells);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return measured_[u][static_cast<std::size_t>(a)] > measured_[u][static_cast<std::size_t>(b)];
    });
    for (int c : order) {
      if (attached_[static_cast<std::size_t>(c)] < capacity_) {
        serving_[u] = c;
        ++attached_[static_cast<std::size_t>(c)];
        break;
      }
    }
    if (serving_[u] < 0) throw std::logic_error("initial attach found no free cell");
  }
}

std::vector<RappDecision>& Simulation::begin_tick() {
  if (in_tick_) throw std::logic_error("begin_tick called twice");
  if (finished()) throw std::logic_error("simulation already finished");
  in_tick_ = true;
  const int t = tick_;
  const auto idx = static_cast<std::size_t>(t + history_);
  const std::size_t n = traces_.size();
  const std::size_t n_cells = params_.topology.size();

  std::vector<double> loads(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) loads[c] = attached_[c] / static_cast<double>(capacity_);

  const double a = std::pow(2.0, -params_.l3_filter_k / 4.0);
  reports_.clear();
  for (std::size_t u = 0; u < n; ++u) {
    const auto& s = traces_[u].samples;
    shadowing_[u].advance(shadow_streams_[u], distance(s[idx].position, s[idx - 1].position));
    rsrp_[u] = rsrp(params_.topology, s[idx].position, shadowing_[u].values());
    for (std::size_t c = 0; c < n_cells; ++c) measured_[u][c] = (1.0 - a) * measured_[u][c] + a * rsrp_[u][c];
    reports_.push_back(E2Report{t, static_cast<int>(u), serving_[u], measured_[u], s[idx].position, loads, last_ho_[u]});
    if (kind_ == ControllerKind::kMlAssisted)
      predicted_[u] = models_.predictors->rsrp.predict(s[idx], traces_[u].mode);
  }

  pending_.clear();
  if (kind_ == ControllerKind::kAhc && is_rapp_tick(t, params_.rapp)) {
    std::vector<UeHistory> history;
    history.reserve(n);
    for (std::size_t u = 0; u < n; ++u)
      history.push_back(UeHistory{static_cast<int>(u), serving_[u],
                                  std::span<const TraceSample>(traces_[u].samples.data(), idx)});
    RappModels rm{models_.predictors, models_.policy, models_.scaling};
    RappOutput out = rapp_step(rm, params_.topology, history, t, params_.rapp, rapp_state_);
    rapp_skipped_ += out.skipped;
    pending_ = std::move(out.decisions);
  }
  return pending_;
}

void Simulation::end_tick() {
  if (!in_tick_) throw std::logic_error("end_tick without begin_tick");
  const int t = tick_;
  const std::size_t n = traces_.size();

  for (const RappDecision& d : pending_) {
    d.ranking.validate();
    cache_.update(d.ranking);
    log_.log(d.ranking);
  }
  pending_.clear();
  if (log_.enabled())
    for (const auto& r : reports_) log_.log(r);

  const XappResult xr = xapp_step(kind_, params_.controllers, cache_, reports_, predicted_, t, timers_, n);
  missing_reports_ += xr.missing_reports;

  std::vector<bool> ho(n, false), pp(n, false);
  for (const E2Control& ctl : xr.controls) {
    const auto u = static_cast<std::size_t>(ctl.ue_id);
    const int from = serving_[u];
    const int to = ctl.target_cell;
    if (to == from) throw std::logic_error("handover target equals the serving cell");
    const auto tc = static_cast<std::size_t>(to);
    HoEvent e{t, ctl.ue_id, from, to, false, false, xr.decisions[u].reason};
    e.success = rsrp_[u][tc] >= params_.controllers.rsrp_floor && attached_[tc] < capacity_;
    pingpong_.observe(e);
    if (e.success) {
      --attached_[static_cast<std::size_t>(from)];
      ++attached_[tc];
      serving_[u] = to;
      last_ho_[u] = RecentHandover{from, t};
    }
    timers_[u].reset();
    log_.log(ctl);
    ho[u] = true;
    pp[u] = e.pingpong;
    ++period_feedback_.handover_attempts;
    period_feedback_.handover_failures += e.success ? 0 : 1;
    period_feedback_.pingpongs += e.pingpong ? 1 : 0;
    events_.push_back(e);
  }

  if (std::accumulate(attached_.begin(), attached_.end(), 0) != static_cast<int>(n))
    throw std::logic_error("unique association violated");
  for (int a : attached_)
    if (a < 0 || a > capacity_) throw std::logic_error("cell admission exceeded");

  double tick_thr = 0.0;
  for (std::size_t u = 0; u < n; ++u) {
    const auto s = static_cast<std::size_t>(serving_[u]);
    const double thr = throughput_mbps(params_.topology, rsrp_[u], serving_[u], attached_[s]);
    last_utility_[u] = params_.utility.per_tick(thr, ho[u], pp[u]);
    throughput_sum_ += thr;
    tick_thr += thr;
    utility_sum_ += last_utility_[u];
    if (record_) rows_.push_back(TickRow{t, static_cast<int>(u), serving_[u], rsrp_[u][s], thr, ho[u], pp[u]});
  }
  period_feedback_.mean_throughput_mbps += tick_thr / static_cast<double>(n);

  ++tick_;
  in_tick_ = false;
  if (finished() || is_rapp_tick(tick_, params_.rapp)) {
    const int period = tick_ - period_feedback_.tick;
    if (period > 0) period_feedback_.mean_throughput_mbps /= period;
    refresh_hook(period_feedback_, log_);
    period_feedback_ = FeedbackRecord{};
    period_feedback_.tick = tick_;
  }
}

void Simulation::run() {
  while (!finished()) {
    begin_tick();
    end_tick();
  }
}

SimResult Simulation::result() const {
  if (!finished()) throw std::logic_error("simulation has not finished");
  SimResult r;
  r.kpi = kpi_from_events(events_, throughput_sum_, utility_sum_, static_cast<int>(traces_.size()), n_ticks_);
  r.events = events_;
  r.ticks = rows_;
  r.rapp_skipped = rapp_skipped_;
  r.missing_reports = missing_reports_;
  return r;
}

SimResult run_simulation(const SimParams& params, ControllerKind kind, std::uint64_t seed, const SimModels& models,
                         bool record_ticks, std::ostream* message_log) {
  Simulation sim(params, kind, seed, models, record_ticks, message_log);
  sim.run();
  return sim.result();
}

void write_tick_csv(std::ostream& out, std::span<const TickRow> rows) {
  out << "tick,ue_id,serving,rsrp_serving,throughput,ho_flag,pp_flag\n";
  for (const TickRow& r : rows)
    out << r.tick << ',' << r.ue_id << ',' << r.serving << ',' << format_double(r.rsrp_serving) << ','
        << format_double(r.throughput_mbps) << ',' << (r.handover ? 1 : 0) << ',' << (r.pingpong ? 1 : 0) << '\n';
}

void write_event_csv(std::ostream& out, std::span<const HoEvent> events) {
  out << "tick,ue_id,from_cell,to_cell,outcome,pingpong,reason\n";
  for (const HoEvent& e : events)
    out << e.tick << ',' << e.ue_id << ',' << e.from_cell << ',' << e.to_cell << ','
        << (e.success ? "success" : "failure") << ',' << (e.pingpong ? 1 : 0) << ',' << reason_name(e.reason)
        << '\n';
}

}  // namespace ahc
