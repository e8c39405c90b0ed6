#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "ahc/forest.hpp"
#include "ahc/knn.hpp"
#include "ahc/rng.hpp"

namespace ahc::oracle {

namespace {

void record(SuiteResult& r, bool ok, const std::string& what) {
  ++r.cases;
  if (ok) return;
  if (r.mismatches == 0) r.first_failure = what;
  ++r.mismatches;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace

MobilityMode knn_classify(const std::vector<std::vector<double>>& train, const std::vector<MobilityMode>& labels,
                          int k, const std::vector<double>& query) {
  const std::size_t d = query.size();
  const double n = static_cast<double>(train.size());
  std::vector<double> mu(d, 0.0), sd(d, 0.0);
  for (const auto& r : train)
    for (std::size_t c = 0; c < d; ++c) mu[c] += r[c] / n;
  for (const auto& r : train)
    for (std::size_t c = 0; c < d; ++c) sd[c] += (r[c] - mu[c]) * (r[c] - mu[c]) / n;
  for (auto& s : sd) s = s > 0.0 ? std::sqrt(s) : 1.0;

  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < train.size(); ++i) {
    double s2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double e = (train[i][c] - query[c]) / sd[c];
      s2 += e * e;
    }
    all.emplace_back(std::sqrt(s2), i);
  }
  std::sort(all.begin(), all.end());

  std::map<int, std::pair<int, double>> tally;  // label -> (votes, distance sum)
  for (int j = 0; j < k; ++j) {
    const auto& [dist, idx] = all[static_cast<std::size_t>(j)];
    auto& t = tally[mode_index(labels[idx])];
    t.first += 1;
    t.second += dist;
  }
  int best = -1, best_votes = 0;
  double best_mean = 0.0;
  for (const auto& [label, t] : tally) {  // ascending label order
    const double mean = t.second / t.first;
    if (t.first > best_votes || (t.first == best_votes && mean < best_mean)) {
      best = label;
      best_votes = t.first;
      best_mean = mean;
    }
  }
  return mode_from_index(best);
}

std::vector<A3Step> a3_enumerate(const A3Config& config, int initial_serving,
                                 const std::vector<std::vector<double>>& rsrp_by_tick) {
  std::vector<A3Step> out;
  int serving = initial_serving;
  int reset_tick = 0;
  for (int t = 0; t < static_cast<int>(rsrp_by_tick.size()); ++t) {
    const auto& now = rsrp_by_tick[static_cast<std::size_t>(t)];
    A3Step step;
    step.serving = serving;
    const int first = t - config.ttt_ticks + 1;
    if (first >= reset_tick) {
      for (int c = 0; c < static_cast<int>(now.size()); ++c) {
        if (c == serving) continue;
        bool held = true;
        for (int tau = first; tau <= t && held; ++tau) {
          const auto& r = rsrp_by_tick[static_cast<std::size_t>(tau)];
          held = r[static_cast<std::size_t>(c)] + config.cio(serving, c) >
                 r[static_cast<std::size_t>(serving)] + config.hysteresis_db;
        }
        if (!held) continue;
        if (!step.handover || now[static_cast<std::size_t>(c)] > now[static_cast<std::size_t>(step.target)]) {
          step.handover = true;
          step.target = c;
        }
      }
    }
    out.push_back(step);
    if (step.handover) {
      serving = step.target;
      reset_tick = t + 1;
    }
  }
  return out;
}

std::vector<bool> pingpong_scan(std::span<const HoEvent> events, int window_ticks) {
  std::vector<bool> flags(events.size(), false);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const HoEvent& e = events[i];
    if (!e.success) continue;
    const HoEvent* prev = nullptr;
    for (std::size_t j = 0; j < i; ++j)
      if (events[j].ue_id == e.ue_id && events[j].success) prev = &events[j];
    flags[i] = prev != nullptr && prev->from_cell == e.to_cell && prev->to_cell == e.from_cell &&
               e.tick - prev->tick <= window_ticks;
  }
  return flags;
}

std::vector<double> gae_unrolled(std::span<const Transition> tr, double bootstrap_value, double discount,
                                 double lambda) {
  const std::size_t n = tr.size();
  std::vector<double> delta(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double next = i + 1 < n ? tr[i + 1].value : bootstrap_value;
    delta[i] = tr[i].reward + (tr[i].done ? 0.0 : discount * next) - tr[i].value;
  }
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double weight = 1.0;
    for (std::size_t l = t; l < n; ++l) {
      adv[t] += weight * delta[l];
      if (tr[l].done) break;
      weight *= discount * lambda;
    }
  }
  return adv;
}

SuiteResult knn_suite(std::uint64_t seed) {
  SuiteResult r;
  RandomStream s(seed);
  std::vector<std::vector<double>> rows;
  std::vector<MobilityMode> labels;
  for (int i = 0; i < 500; ++i) {
    const bool b = s.uniform() < 0.5;
    rows.push_back({s.normal() + (b ? 1.0 : 0.0), 10.0 * s.normal() + (b ? 5.0 : 0.0), s.uniform()});
    labels.push_back(b ? MobilityMode::kBus : MobilityMode::kCar);
  }
  Table X(3);
  for (const auto& row : rows) X.push_back(row);
  for (int k : {1, 5}) {
    const KnnClassifier knn(X, labels, k);
    for (int q = 0; q < 100; ++q) {
      const std::vector<double> query{s.normal() + 0.5, 10.0 * s.normal() + 2.5, s.uniform()};
      std::ostringstream what;
      what << "k=" << k << " query " << q;
      record(r, knn.classify(query) == knn_classify(rows, labels, k, query), what.str());
    }
  }
  return r;
}

SuiteResult a3_ttt_suite(std::uint64_t seed, int n_sequences) {
  SuiteResult r;
  RandomStream s(seed);
  for (int seq = 0; seq < n_sequences; ++seq) {
    A3Config cfg;
    cfg.ttt_ticks = 1 + static_cast<int>(s.index(5));
    cfg.hysteresis_db = std::array<double, 3>{0.0, 1.0, 3.0}[s.index(3)];
    const std::size_t n_cells = 2 + s.index(4);
    if (s.uniform() < 0.3) {
      cfg.cio_pairs.assign(n_cells, std::vector<double>(n_cells, 0.0));
      for (auto& row : cfg.cio_pairs)
        for (double& v : row) v = std::round(s.uniform(-2.0, 2.0) * 2.0) / 2.0;
    }
    const int n_ticks = 10 + static_cast<int>(s.index(40));
    std::vector<std::vector<double>> rsrp(static_cast<std::size_t>(n_ticks), std::vector<double>(n_cells));
    std::vector<double> level(n_cells);
    for (double& v : level) v = -90.0 + std::round(s.uniform(-6.0, 6.0));
    for (auto& tick : rsrp) {
      for (std::size_t c = 0; c < n_cells; ++c) {
        level[c] += std::round(s.normal() * 2.0) / 2.0;  // half-dB steps make ties common
        tick[c] = level[c];
      }
    }
    const int initial = static_cast<int>(s.index(n_cells));
    const auto expected = a3_enumerate(cfg, initial, rsrp);

    A3TimerState timers(n_cells);
    int serving = initial;
    for (int t = 0; t < n_ticks; ++t) {
      const HoDecision d = a3_decide(cfg, timers, serving, rsrp[static_cast<std::size_t>(t)]);
      const A3Step& e = expected[static_cast<std::size_t>(t)];
      std::ostringstream what;
      what << "sequence " << seq << " tick " << t;
      record(r, d.handover == e.handover && (!d.handover || d.target == e.target), what.str());
      if (d.handover) {
        serving = d.target;
        timers.reset();
      }
    }
  }
  return r;
}

SuiteResult pingpong_suite(std::uint64_t seed, int n_logs) {
  SuiteResult r;
  RandomStream s(seed);
  for (int log = 0; log < n_logs; ++log) {
    const int n_ues = 1 + static_cast<int>(s.index(4));
    const int window = 1 + static_cast<int>(s.index(15));
    std::vector<HoEvent> events;
    std::vector<int> tick(static_cast<std::size_t>(n_ues), 0);
    const int n_events = static_cast<int>(s.index(40));
    for (int i = 0; i < n_events; ++i) {
      HoEvent e;
      e.ue_id = static_cast<int>(s.index(static_cast<std::size_t>(n_ues)));
      auto& t = tick[static_cast<std::size_t>(e.ue_id)];
      t += static_cast<int>(s.index(16));
      e.tick = t;
      e.from_cell = static_cast<int>(s.index(3));
      e.to_cell = (e.from_cell + 1 + static_cast<int>(s.index(2))) % 3;
      e.success = s.uniform() < 0.85;
      e.pingpong = s.uniform() < 0.5;  // must be overwritten
      events.push_back(e);
    }
    const auto expected = pingpong_scan(events, window);
    detect_pingpong(events, window);
    for (std::size_t i = 0; i < events.size(); ++i) {
      std::ostringstream what;
      what << "log " << log << " event " << i;
      record(r, events[i].pingpong == expected[i], what.str());
    }
    if (events.empty()) record(r, true, "empty log");
  }
  return r;
}

SuiteResult gae_suite() {
  SuiteResult r;
  auto make = [](std::vector<double> rewards, std::vector<double> values, std::vector<bool> done) {
    std::vector<Transition> t(rewards.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i].reward = rewards[i];
      t[i].value = values[i];
      t[i].done = done[i];
    }
    return t;
  };
  auto check = [&](const std::string& name, const GaeResult& got, const std::vector<double>& adv,
                   std::span<const Transition> tr) {
    bool ok = got.advantages.size() == adv.size();
    for (std::size_t i = 0; ok && i < adv.size(); ++i) {
      ok = close(got.advantages[i], adv[i], 1e-12) && close(got.returns[i], adv[i] + tr[i].value, 1e-12);
    }
    record(r, ok, name);
  };

  {
    const auto t = make({1.0}, {0.0}, {false});
    check("single step", compute_gae(t, 0.0, 0.99, 0.95), {1.0}, t);
  }
  {
    // delta = {1.4, 2.35, 3.3}; A2 = 3.3, A1 = 2.35 + 0.72*3.3, A0 = 1.4 + 0.72*A1
    const auto t = make({1.0, 2.0, 3.0}, {0.5, 1.0, 1.5}, {false, false, false});
    check("three steps", compute_gae(t, 2.0, 0.9, 0.8), {4.80272, 4.726, 3.3}, t);
  }
  {
    // terminal after step 1 cuts both the bootstrap and the trace
    const auto t = make({1.0, 2.0, 3.0}, {0.5, 1.0, 1.5}, {false, true, false});
    check("terminal in the middle", compute_gae(t, 2.0, 0.9, 0.8), {2.12, 1.0, 3.3}, t);
  }
  {
    // lambda = 0 gives the one-step TD residual
    const auto t = make({1.0, -2.0, 0.5}, {0.3, 0.1, -0.4}, {false, false, false});
    check("td(0)", compute_gae(t, 0.7, 0.9, 0.0), {1.0 + 0.09 - 0.3, -2.0 - 0.36 - 0.1, 0.5 + 0.63 + 0.4}, t);
  }
  {
    // lambda = 1, discount = 1: advantage = remaining return minus value
    const auto t = make({1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}, {false, false, false});
    check("monte carlo", compute_gae(t, 0.0, 1.0, 1.0), {3.0, 2.0, 1.0}, t);
  }
  RandomStream s(31);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + s.index(30);
    std::vector<Transition> t(n);
    for (auto& x : t) {
      x.reward = s.normal();
      x.value = s.normal();
      x.done = s.uniform() < 0.1;
    }
    const double boot = s.normal(), gamma = s.uniform(0.5, 1.0), lambda = s.uniform();
    const GaeResult got = compute_gae(t, boot, gamma, lambda);
    const auto want = gae_unrolled(t, boot, gamma, lambda);
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) ok = ok && close(got.advantages[i], want[i], 1e-9);
    record(r, ok, "random trajectory " + std::to_string(k));
  }
  return r;
}

SuiteResult ci_suite() {
  SuiteResult r;
  const std::vector<double> v{1, 2, 3, 4};
  const CiStat c = mean_ci(v);
  // s = sqrt(5/3), t_{0.975,3} = 3.182446 -> 3.182446 * s / 2
  record(r, close(c.mean, 2.5, 1e-12), "mean of {1,2,3,4}");
  record(r, close(c.half_width, 2.054, 1e-3), "half-width of {1,2,3,4}");
  record(r, close(c.half_width, 3.182446 * std::sqrt(5.0 / 3.0) / 2.0, 1e-6), "half-width formula");
  record(r, close(t_quantile_975(3), 3.182, 1e-3), "t quantile df=3");

  const std::vector<double> flat(5, 7.0);
  record(r, mean_ci(flat).half_width == 0.0, "equal values");

  // 30 runs alternating 77.10 +- d with s/sqrt(30) * 2.045 = 5.72.
  const double s_target = 5.72 * std::sqrt(30.0) / t_quantile_975(29);
  const double d = s_target * std::sqrt(29.0 / 30.0);
  std::vector<double> runs;
  for (int i = 0; i < 30; ++i) runs.push_back(77.10 + (i % 2 == 0 ? d : -d));
  const CiStat p = mean_ci(runs);
  record(r, close(p.half_width, 5.72, 1e-9), "30-run half-width");
  record(r, close(p.lo(), 71.38, 1e-9) && close(p.hi(), 82.82, 1e-9), "30-run interval");

  bool threw = false;
  try {
    const std::vector<double> one{1.0};
    (void)mean_ci(one);
  } catch (const std::invalid_argument&) {
    threw = true;
  }
  record(r, threw, "n < 2 rejected");
  return r;
}

SuiteResult forest_split_suite() {
  SuiteResult r;
  const std::vector<double> xs{0, 1, 2, 3}, ys{0, 0, 10, 10};
  double best_t = 0.0, best_sse = 1e300;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double t = 0.5 * (xs[i] + xs[i + 1]);
    double sse = 0.0;
    for (bool left : {true, false}) {
      double sum = 0.0;
      int n = 0;
      for (std::size_t j = 0; j < xs.size(); ++j)
        if ((xs[j] <= t) == left) {
          sum += ys[j];
          ++n;
        }
      for (std::size_t j = 0; j < xs.size(); ++j)
        if ((xs[j] <= t) == left) sse += (ys[j] - sum / n) * (ys[j] - sum / n);
    }
    if (sse < best_sse) {
      best_sse = sse;
      best_t = t;
    }
  }

  Table X(1), Y(1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    X.push_back(std::span<const double>(&xs[i], 1));
    Y.push_back(std::span<const double>(&ys[i], 1));
  }
  RandomStream fs(1);
  const ForestParams p{.n_trees = 1, .max_depth = 1, .min_leaf = 1, .bootstrap = false, .max_features = 1};
  const ForestModel m = ForestModel::train(X, Y, p, fs);
  const TreeNode& root = m.trees().at(0).nodes.at(0);
  record(r, root.feature == 0, "root splits on the feature");
  const double threshold = root.threshold * m.feature_normalizer().stddev[0] + m.feature_normalizer().mean[0];
  record(r, close(threshold, best_t, 1e-9), "threshold equals the exhaustive optimum");
  record(r, threshold > 1.0 && threshold < 2.0, "threshold in (1, 2)");
  const double left = m.predict(std::vector<double>{0.5})[0];
  const double right = m.predict(std::vector<double>{2.5})[0];
  record(r, close(left, 0.0, 1e-9) && close(right, 10.0, 1e-9), "leaf means {0, 10}");
  return r;
}

double fd_relative_error(Eigen::VectorXd& params, const Eigen::VectorXd& analytic, const std::function<double()>& loss,
                         double h) {
  Eigen::VectorXd numeric(params.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = loss();
    params[i] = keep - h;
    const double down = loss();
    params[i] = keep;
    numeric[i] = (up - down) / (2.0 * h);
  }
  const double scale = std::max(analytic.norm(), numeric.norm());
  return scale == 0.0 ? 0.0 : (analytic - numeric).norm() / scale;
}

GradientCheck gradient_check(std::uint64_t seed) {
  RandomStream s(seed);
  GradientCheck out;
  struct Shape {
    int states, actions;
    std::vector<int> hidden;
    bool masked;
  };
  for (const Shape& shape : {Shape{2, 2, {3}, false}, Shape{9, 6, {8, 8}, true}}) {
    PolicyNet net = PolicyNet::create(shape.states, shape.actions, shape.hidden, s);
    std::vector<TrainingSample> batch(24);
    for (auto& b : batch) {
      b.state.resize(static_cast<std::size_t>(shape.states));
      for (double& v : b.state) v = s.normal();
      b.mask.assign(static_cast<std::size_t>(shape.actions), true);
      if (shape.masked)
        for (std::size_t j = 1; j < b.mask.size(); ++j) b.mask[j] = s.uniform() < 0.6;
      do b.action = static_cast<int>(s.index(b.mask.size()));
      while (!b.mask[static_cast<std::size_t>(b.action)]);
      const auto o = policy_forward(net, b.state, b.mask);
      // old log-probs off-policy enough that some ratios clip
      b.old_log_prob = masked_log_prob(o.logits, b.mask, b.action) + s.uniform(-0.5, 0.5);
      b.advantage = s.normal();
      b.ret = 2.0 * s.normal();
    }
    PpoConfig actor_only;
    actor_only.entropy_coef = 0.0;
    Eigen::VectorXd g;
    ppo_loss(net, batch, actor_only, &g, nullptr);
    out.actor_surrogate = std::max(out.actor_surrogate, fd_relative_error(net.actor.params(), g, [&] {
      return -ppo_loss(net, batch, actor_only).surrogate;
    }));

    PpoConfig entropy_only;
    entropy_only.entropy_coef = 1.0;
    auto flat = batch;
    for (auto& b : flat) b.advantage = 0.0;
    ppo_loss(net, flat, entropy_only, &g, nullptr);
    out.entropy = std::max(out.entropy, fd_relative_error(net.actor.params(), g, [&] {
      return -ppo_loss(net, flat, entropy_only).entropy;
    }));

    PpoConfig critic;
    Eigen::VectorXd gc;
    ppo_loss(net, batch, critic, nullptr, &gc);
    out.critic = std::max(out.critic, fd_relative_error(net.critic.params(), gc, [&] {
      return critic.value_coef * ppo_loss(net, batch, critic).value_loss;
    }));
  }
  return out;
}

}  // namespace ahc::oracle
