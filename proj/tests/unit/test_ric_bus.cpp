#include <doctest.h>

#include <limits>
#include <set>
#include <sstream>

#include "ahc/ric_bus.hpp"

using namespace ahc;

namespace {

A1Ranking ranking(int ue, std::vector<int> cells, int issued, int ttl = 10) {
  A1Ranking r;
  r.ue_id = ue;
  r.issued_tick = issued;
  r.ttl_ticks = ttl;
  double score = 1.0;
  for (int c : cells) {
    r.candidates.push_back({c, score});
    score *= 0.5;
  }
  return r;
}

const Topology& topology() {
  static const Topology t = build_ring_topology(27, 1000, 500, 46);
  return t;
}

// One small bundle shared by the rApp cases.
const PredictorBundle& bundle() {
  static const PredictorBundle b = [] {
    PopulationConfig cfg;
    cfg.n_ues = 21;
    cfg.n_ticks = 60;
    const auto traces = generate_population(cfg, 31);
    PredictorConfig pc;
    pc.trajectory_forest.n_trees = 3;
    pc.rsrp_forest.n_trees = 3;
    pc.rsrp_forest.max_depth = 5;
    return train_predictors(traces, topology(), pc, 0.2, 1).bundle;
  }();
  return b;
}

E2Report report(int tick, int ue, int serving, RsrpVector rsrp) {
  E2Report r;
  r.tick = tick;
  r.ue_id = ue;
  r.serving_cell = serving;
  r.loads.assign(rsrp.size(), 0.2);
  r.rsrp = std::move(rsrp);
  return r;
}

}  // namespace

TEST_CASE("A1 cache keeps the newest ranking") {
  A1Cache cache;
  cache.update(ranking(1, {3}, 20));
  cache.update(ranking(1, {4}, 10));  // older, arrives late
  REQUIRE(cache.lookup(1, 20) != nullptr);
  CHECK(cache.lookup(1, 20)->candidates[0].cell_id == 3);
  cache.update(ranking(1, {5}, 25));
  CHECK(cache.lookup(1, 25)->candidates[0].cell_id == 5);
  const std::vector<A1Ranking> batch{ranking(2, {1}, 0), ranking(3, {2}, 0)};
  cache.update(batch);
  CHECK(cache.size() == 3);
}

TEST_CASE("A1 cache TTL is inclusive and stale entries are evicted on read") {
  A1Cache cache;
  cache.update(ranking(7, {2, 1}, 30, 10));
  CHECK(cache.status(7, 40) == A1Cache::Status::kValid);
  CHECK(cache.lookup(7, 40) != nullptr);
  CHECK(cache.status(7, 41) == A1Cache::Status::kStale);
  CHECK(cache.status(8, 41) == A1Cache::Status::kMissing);
  CHECK(cache.lookup(7, 29) == nullptr);  // issued in the future: not visible
  CHECK(cache.size() == 1);
  CHECK(cache.lookup(7, 41) == nullptr);
  CHECK(cache.size() == 0);
  CHECK(cache.status(7, 41) == A1Cache::Status::kMissing);
}

TEST_CASE("A1 ranking schema") {
  CHECK_NOTHROW(ranking(0, {3, 1, 2}, 0).validate());
  CHECK_THROWS_AS(ranking(0, {}, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(ranking(0, {3, 3}, 0).validate(), std::invalid_argument);
  A1Ranking r = ranking(0, {1, 2}, 0);
  r.candidates[1].score = 2.0;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

TEST_CASE("rApp schedule") {
  const RappConfig k10;
  std::vector<int> ticks;
  for (int t = 0; t <= 35; ++t)
    if (is_rapp_tick(t, k10)) ticks.push_back(t);
  CHECK(ticks == std::vector<int>{0, 10, 20, 30});
  RappConfig k1;
  k1.period_ticks = 1;
  for (int t = 0; t < 5; ++t) CHECK(is_rapp_tick(t, k1));
}

TEST_CASE("controller names") {
  for (ControllerKind k : kAllControllers) CHECK(parse_controller(controller_name(k)) == k);
  CHECK(parse_controller_list("a3, ahc") == std::vector<ControllerKind>{ControllerKind::kA3, ControllerKind::kAhc});
  CHECK_THROWS_AS(parse_controller("a4"), std::invalid_argument);
  CHECK_THROWS_AS(parse_controller_list("a3,a3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_controller_list(" , "), std::invalid_argument);
}

TEST_CASE("admissible mask always contains the serving cell") {
  const auto m = admissible_cells(topology(), {0.0, 0.0}, 13, 0.1);
  CHECK(m[13]);
  CHECK(std::count(m.begin(), m.end(), true) == 1);
  const Vec2 at_site = topology().sites[4].position;
  const auto n = admissible_cells(topology(), at_site, 0, 1.0);
  CHECK(n[4]);
  CHECK(n[0]);
  for (const auto& s : topology().sites)
    CHECK(n[static_cast<std::size_t>(s.cell_id)] == (s.cell_id == 0 || distance(s.position, at_site) <= 500.0));
}

TEST_CASE("rApp step") {
  PopulationConfig cfg;
  cfg.n_ues = 7;
  cfg.n_ticks = 40;
  const auto traces = generate_population(cfg, 99);
  RandomStream s(5);
  const PolicyNet net = PolicyNet::create(36, 27, {16}, s);
  const RappModels models{&bundle(), &net, StateScaling{}};
  const RappConfig rc;

  std::vector<UeHistory> hist;
  for (const auto& t : traces) {
    const std::size_t len = t.ue_id == 0 ? 5 : 30;  // UE 0 is short of the window
    hist.push_back(UeHistory{t.ue_id, 0, std::span<const TraceSample>(t.samples.data(), len)});
  }
  RappState state;
  const RappOutput out = rapp_step(models, topology(), hist, 30, rc, state);
  CHECK(out.skipped == 1);
  REQUIRE(out.decisions.size() == traces.size() - 1);
  for (const auto& d : out.decisions) {
    CHECK(d.ue_id != 0);
    CHECK(d.state.size() == 36);
    CHECK(d.mask[0]);
    CHECK_NOTHROW(d.ranking.validate());
    CHECK(d.ranking.issued_tick == 30);
    CHECK(d.ranking.ttl_ticks == rc.period_ticks);
    CHECK(d.ranking.mode_hint == d.mode);
    CHECK(state.previous(d.ue_id) == d.mode);
    for (const auto& c : d.ranking.candidates) CHECK(d.mask[static_cast<std::size_t>(c.cell_id)]);
  }

  // pure given the inputs, including the self-fed previous mode
  RappState s1, s2;
  const auto a = rapp_step(models, topology(), hist, 30, rc, s1);
  const auto b = rapp_step(models, topology(), hist, 30, rc, s2);
  for (std::size_t i = 0; i < a.decisions.size(); ++i) {
    CHECK(a.decisions[i].state == b.decisions[i].state);
    CHECK(a.decisions[i].ranking.candidates.size() == b.decisions[i].ranking.candidates.size());
  }

  CHECK_THROWS_AS(rapp_step(RappModels{}, topology(), hist, 0, rc, state), std::invalid_argument);
}

TEST_CASE("xApp step") {
  const ControllerConfig cfg;
  A1Cache cache;
  std::vector<A3TimerState> timers(3, A3TimerState(4));
  const std::vector<RsrpVector> none;

  SUBCASE("all stay gives no controls") {
    const std::vector<E2Report> reps{report(0, 0, 0, {-80, -90, -95, -99}), report(0, 1, 1, {-90, -80, -95, -99})};
    const auto out = xapp_step(ControllerKind::kA3, cfg, cache, reps, none, 0, timers, 3);
    CHECK(out.controls.empty());
    CHECK(out.decisions.size() == 2);
    CHECK(out.missing_reports == 1);
  }
  SUBCASE("one handover gives one matching control") {
    cache.update(ranking(2, {3, 0}, 0));
    const std::vector<E2Report> reps{report(5, 2, 0, {-90, -95, -95, -80})};
    const auto out = xapp_step(ControllerKind::kAhc, cfg, cache, reps, none, 5, timers, 3);
    REQUIRE(out.controls.size() == 1);
    CHECK(out.controls[0].ue_id == 2);
    CHECK(out.controls[0].target_cell == 3);
    CHECK(out.controls[0].tick == 5);
  }
  SUBCASE("malformed report sets") {
    const std::vector<E2Report> dup{report(0, 1, 0, {-80, -90, -90, -90}), report(0, 1, 0, {-80, -90, -90, -90})};
    CHECK_THROWS_AS(xapp_step(ControllerKind::kA3, cfg, cache, dup, none, 0, timers, 3), std::invalid_argument);
    const std::vector<E2Report> unknown{report(0, 5, 0, {-80, -90, -90, -90})};
    CHECK_THROWS_AS(xapp_step(ControllerKind::kA3, cfg, cache, unknown, none, 0, timers, 3), std::invalid_argument);
    const std::vector<E2Report> ok{report(0, 0, 0, {-80, -90, -90, -90})};
    CHECK_THROWS_AS(xapp_step(ControllerKind::kMlAssisted, cfg, cache, ok, none, 0, timers, 3), std::invalid_argument);
  }
}

TEST_CASE("baseline controllers ignore the A1 cache") {
  RandomStream s(61);
  const std::size_t n_ues = 4, n_cells = 5;
  for (ControllerKind kind : {ControllerKind::kA3, ControllerKind::kLoadBalance, ControllerKind::kMlAssisted}) {
    A1Cache empty, full;
    std::vector<A3TimerState> t1(n_ues, A3TimerState(n_cells)), t2 = t1;
    std::vector<int> serving(n_ues, 0);
    for (int tick = 0; tick < 200; ++tick) {
      for (std::size_t u = 0; u < n_ues; ++u)
        full.update(ranking(static_cast<int>(u), {static_cast<int>(s.index(n_cells))}, tick, 1000));
      std::vector<E2Report> reps;
      std::vector<RsrpVector> pred(n_ues);
      for (std::size_t u = 0; u < n_ues; ++u) {
        RsrpVector r(n_cells);
        for (double& v : r) v = -90.0 + 8.0 * s.normal();
        E2Report e = report(tick, static_cast<int>(u), serving[u], r);
        for (double& l : e.loads) l = s.uniform();
        reps.push_back(e);
        pred[u] = r;
        for (double& v : pred[u]) v += s.normal();
      }
      const auto a = xapp_step(kind, ControllerConfig{}, empty, reps, pred, tick, t1, n_ues);
      const auto b = xapp_step(kind, ControllerConfig{}, full, reps, pred, tick, t2, n_ues);
      REQUIRE(a.controls.size() == b.controls.size());
      for (std::size_t i = 0; i < a.controls.size(); ++i) {
        CHECK(a.controls[i].ue_id == b.controls[i].ue_id);
        CHECK(a.controls[i].target_cell == b.controls[i].target_cell);
      }
      for (const auto& c : a.controls) {
        serving[static_cast<std::size_t>(c.ue_id)] = c.target_cell;
        t1[static_cast<std::size_t>(c.ue_id)].reset();
        t2[static_cast<std::size_t>(c.ue_id)].reset();
      }
    }
  }
}

TEST_CASE("controls are one per handover decision") {
  RandomStream s(12);
  const std::size_t n_ues = 6, n_cells = 4;
  A1Cache cache;
  std::vector<A3TimerState> timers(n_ues, A3TimerState(n_cells));
  for (int tick = 0; tick < 100; ++tick) {
    std::vector<E2Report> reps;
    for (std::size_t u = 0; u < n_ues; ++u) {
      if (s.uniform() < 0.2) continue;  // dropped report
      RsrpVector r(n_cells);
      for (double& v : r) v = -90.0 + 10.0 * s.normal();
      reps.push_back(report(tick, static_cast<int>(u), static_cast<int>(s.index(n_cells)), r));
      if (s.uniform() < 0.5) cache.update(ranking(static_cast<int>(u), {static_cast<int>(s.index(n_cells))}, tick, 3));
    }
    const auto out = xapp_step(ControllerKind::kAhc, ControllerConfig{}, cache, reps, {}, tick, timers, n_ues);
    CHECK(out.missing_reports == n_ues - reps.size());
    REQUIRE(out.decisions.size() == reps.size());
    std::size_t handovers = 0;
    std::set<int> ues;
    for (std::size_t i = 0; i < reps.size(); ++i)
      if (out.decisions[i].handover) {
        ++handovers;
        CHECK(out.decisions[i].target != reps[i].serving_cell);
      }
    for (const auto& c : out.controls) CHECK(ues.insert(c.ue_id).second);
    CHECK(out.controls.size() == handovers);
  }
}

TEST_CASE("with K=1 and guards off, AHC follows the policy's top choice") {
  RandomStream s(77);
  const int n_cells = 27;
  const PolicyNet net = PolicyNet::create(36, n_cells, {16}, s);
  ControllerConfig cfg;
  cfg.ahc.rsrp_floor = -std::numeric_limits<double>::infinity();
  cfg.ahc.load_max = 1.0;
  cfg.ahc.stickiness_db = 0.0;
  cfg.ahc.return_guard_ticks = 0;
  A1Cache cache;
  std::vector<A3TimerState> timers(1, A3TimerState(n_cells));
  int serving = 0, agree = 0, checked = 0;
  for (int tick = 0; tick < 300; ++tick) {
    RsrpVector r(n_cells);
    for (double& v : r) v = -95.0 + 12.0 * s.normal();
    ActionMask mask(n_cells);
    for (auto&& m : mask) m = s.uniform() < 0.4;
    mask[static_cast<std::size_t>(serving)] = true;
    const auto st = make_policy_state(MobilityMode::kCar, {s.uniform(-1500, 1500), s.uniform(-1500, 1500)}, r);
    const auto ranked = rank_cells(net, st, mask);
    A1Ranking a1;
    a1.ue_id = 0;
    a1.candidates = ranked;
    a1.issued_tick = tick;
    a1.ttl_ticks = std::numeric_limits<int>::max() / 2;
    cache.update(a1);

    E2Report rep = report(tick, 0, serving, r);
    for (double& l : rep.loads) l = s.uniform(0.0, 0.99);
    rep.last_handover = RecentHandover{static_cast<int>(s.index(n_cells)), tick - 1};
    const auto out = xapp_step(ControllerKind::kAhc, cfg, cache, std::span<const E2Report>(&rep, 1), {}, tick, timers, 1);
    if (ranked[0].cell_id != serving) {
      ++checked;
      REQUIRE(out.controls.size() == 1);
      agree += out.controls[0].target_cell == ranked[0].cell_id;
      serving = out.controls[0].target_cell;
      timers[0].reset();
    } else {
      CHECK(out.controls.empty());
    }
  }
  CHECK(checked > 100);
  CHECK(agree == checked);
}

TEST_CASE("message log writes one typed JSON line per message") {
  std::ostringstream os;
  MessageLog log(&os);
  CHECK(log.enabled());
  E2Report r = report(3, 1, 2, {-80.5, -90.0});
  r.position = Vec2{1.0, 2.0};
  log.log(r);
  log.log(ranking(1, {2, 0}, 3));
  log.log(E2Control{3, 1, 0});
  refresh_hook(FeedbackRecord{10, 4, 1, 0, 12.5}, log);
  std::istringstream in(os.str());
  std::string line;
  std::vector<std::string> types;
  while (std::getline(in, line)) {
    REQUIRE(line.rfind("{\"type\":\"", 0) == 0);
    types.push_back(line.substr(9, line.find('"', 9) - 9));
  }
  CHECK(types == std::vector<std::string>{"e2_report", "a1_ranking", "e2_control", "feedback"});

  MessageLog off(nullptr);
  CHECK_FALSE(off.enabled());
  off.log(E2Control{});
}

TEST_CASE("controller config validation") {
  ControllerConfig c;
  CHECK_NOTHROW(c.validate());
  c.load_hi = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ControllerConfig{};
  c.ahc.load_max = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = ControllerConfig{};
  c.ahc.return_guard_ticks = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
