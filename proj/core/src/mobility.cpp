#include "ahc/mobility.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ahc {

namespace {

constexpr std::array<std::string_view, kModeCount> kNames = {"PED",   "CYCLIST", "CAR", "BUS",
                                                             "TRAIN", "DRONE",   "UAV"};

double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

// Reflects a point (and its heading) back into the arena.
void reflect(Vec2& p, double& heading, const Arena& arena) {
  if (p.x < arena.x_min) {
    p.x = 2.0 * arena.x_min - p.x;
    heading = std::numbers::pi - heading;
  } else if (p.x > arena.x_max) {
    p.x = 2.0 * arena.x_max - p.x;
    heading = std::numbers::pi - heading;
  }
  if (p.y < arena.y_min) {
    p.y = 2.0 * arena.y_min - p.y;
    heading = -heading;
  } else if (p.y > arena.y_max) {
    p.y = 2.0 * arena.y_max - p.y;
    heading = -heading;
  }
  heading = wrap_angle(heading);
}

enum class Phase { kCruise, kBraking, kDwell, kPullAway };

}  // namespace

MobilityMode mode_from_index(int index) {
  if (index < 0 || index >= kModeCount)
    throw std::out_of_range("mode index " + std::to_string(index));
  return static_cast<MobilityMode>(index);
}

std::string_view mode_name(MobilityMode mode) { return kNames[mode_index(mode)]; }

MobilityMode parse_mode(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (int i = 0; i < kModeCount; ++i)
    if (kNames[i] == upper) return mode_from_index(i);
  throw std::invalid_argument("unknown mobility mode '" + std::string(name) + "'");
}

std::array<double, kModeCount> one_hot(MobilityMode mode) {
  std::array<double, kModeCount> e{};
  e[mode_index(mode)] = 1.0;
  return e;
}

MobilityMode from_one_hot(std::span<const double> encoding) {
  if (encoding.size() != kModeCount) throw std::invalid_argument("one-hot length must be 7");
  int hot = -1;
  for (int i = 0; i < kModeCount; ++i) {
    if (encoding[i] == 1.0) {
      if (hot >= 0) throw std::invalid_argument("one-hot has more than one active entry");
      hot = i;
    } else if (encoding[i] != 0.0) {
      throw std::invalid_argument("one-hot entries must be 0 or 1");
    }
  }
  if (hot < 0) throw std::invalid_argument("one-hot has no active entry");
  return mode_from_index(hot);
}

ModeProfile default_profile(MobilityMode mode) {
  ModeProfile p;
  switch (mode) {
    case MobilityMode::kPed:
      p = {.speed_min = 0.5, .speed_max = 2.0, .accel_std = 0.3, .bearing_rate_std = 0.35};
      break;
    case MobilityMode::kCyclist:
      p = {.speed_min = 3.0, .speed_max = 8.0, .accel_std = 0.6, .bearing_rate_std = 0.15};
      break;
    case MobilityMode::kCar:
      p = {.speed_min = 8.0, .speed_max = 25.0, .accel_std = 2.0, .bearing_rate_std = 0.08};
      break;
    case MobilityMode::kBus:
      p = {.speed_min = 5.0,
           .speed_max = 15.0,
           .accel_std = 0.5,
           .bearing_rate_std = 0.03,
           .stop_probability = 0.01,
           .stop_dwell_ticks = 30};
      break;
    case MobilityMode::kTrain:
      p = {.speed_min = 20.0, .speed_max = 40.0, .accel_std = 0.15, .bearing_rate_std = 0.002};
      break;
    case MobilityMode::kDrone:
      p = {.speed_min = 5.0, .speed_max = 15.0, .accel_std = 1.2, .bearing_rate_std = 0.6};
      break;
    case MobilityMode::kUav:
      p = {.speed_min = 15.0, .speed_max = 30.0, .accel_std = 0.5, .bearing_rate_std = 0.02};
      break;
  }
  return p;
}

ProfileTable default_profiles() {
  ProfileTable t;
  for (auto m : kAllModes) t[mode_index(m)] = default_profile(m);
  return t;
}

std::vector<Kinematics> derive_kinematics(std::span<const Vec2> positions, double tick_s) {
  if (positions.size() < 4) throw std::invalid_argument("insufficient history");
  const std::size_t n = positions.size();
  std::vector<Kinematics> out(n);
  std::vector<double> heading(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const Vec2 d = positions[i] - positions[i - 1];
    out[i].speed = d.norm() / tick_s;
    // A stationary step keeps the previous heading.
    heading[i] = (d.x == 0.0 && d.y == 0.0) ? heading[i - 1] : std::atan2(d.y, d.x);
  }
  for (std::size_t i = 2; i < n; ++i) {
    out[i].accel = (out[i].speed - out[i - 1].speed) / tick_s;
    out[i].bearing_rate = wrap_angle(heading[i] - heading[i - 1]) / tick_s;
  }
  for (std::size_t i = 3; i < n; ++i) out[i].jerk = (out[i].accel - out[i - 1].accel) / tick_s;
  return out;
}

std::vector<TraceSample> generate_trace(RandomStream& stream, MobilityMode mode,
                                        const ModeProfile& profile, const TraceOptions& options) {
  if (options.n_ticks < 2) throw std::invalid_argument("n_ticks must be >= 2");
  if (!(options.tick_s > 0.0)) throw std::invalid_argument("tick_s must be positive");

  // Three extra leading positions so the first emitted tick already has a
  // full finite-difference history.
  constexpr int kWarmup = 3;
  const int total = options.n_ticks + kWarmup;
  const double dt = options.tick_s;

  Vec2 pos = options.start;
  double heading = options.random_heading ? stream.uniform(-std::numbers::pi, std::numbers::pi)
                                          : options.start_heading;
  double target = stream.uniform(profile.speed_min, profile.speed_max);
  double speed = target;
  Phase phase = Phase::kCruise;
  int dwell_left = 0;

  std::vector<Vec2> positions;
  positions.reserve(static_cast<std::size_t>(total));
  positions.push_back(pos);
  for (int step = 1; step < total; ++step) {
    switch (phase) {
      case Phase::kCruise:
        if (profile.stop_probability > 0.0 && stream.uniform() < profile.stop_probability) {
          phase = Phase::kBraking;
        } else {
          if (profile.target_change_prob > 0.0 && stream.uniform() < profile.target_change_prob)
            target = stream.uniform(profile.speed_min, profile.speed_max);
          speed += profile.speed_reversion * (target - speed) * dt +
                   profile.accel_std * dt * stream.normal();
          speed = std::clamp(speed, profile.speed_min, profile.speed_max);
        }
        break;
      case Phase::kBraking:
        speed = std::max(0.0, speed - profile.stop_decel * dt);
        if (speed == 0.0) {
          phase = Phase::kDwell;
          dwell_left = profile.stop_dwell_ticks;
        }
        break;
      case Phase::kDwell:
        if (--dwell_left <= 0) {
          phase = Phase::kPullAway;
          target = stream.uniform(profile.speed_min, profile.speed_max);
        }
        break;
      case Phase::kPullAway:
        speed = std::min(target, speed + profile.stop_decel * dt);
        if (speed >= target) phase = Phase::kCruise;
        break;
    }
    if (speed > 0.0) heading = wrap_angle(heading + profile.bearing_rate_std * stream.normal() * dt);
    pos = pos + (speed * dt) * Vec2{std::cos(heading), std::sin(heading)};
    reflect(pos, heading, options.arena);
    positions.push_back(pos);
  }

  const auto kin = derive_kinematics(positions, dt);
  std::vector<TraceSample> out;
  out.reserve(static_cast<std::size_t>(options.n_ticks));
  for (int i = kWarmup; i < total; ++i)
    out.push_back(TraceSample{options.first_tick + (i - kWarmup),
                              positions[static_cast<std::size_t>(i)],
                              kin[static_cast<std::size_t>(i)], mode});
  return out;
}

std::array<int, kModeCount> apportion_modes(int n_ues, std::span<const double> mix) {
  if (mix.size() != kModeCount) throw std::invalid_argument("mode mix must have 7 entries");
  if (n_ues < 0) throw std::invalid_argument("n_ues must be >= 0");
  double sum = 0.0;
  for (double f : mix) {
    if (f < 0.0) throw std::invalid_argument("mode fraction must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("mode fractions must sum to 1");

  std::array<int, kModeCount> counts{};
  std::array<double, kModeCount> remainder{};
  int assigned = 0;
  for (int i = 0; i < kModeCount; ++i) {
    const double quota = n_ues * mix[i];
    counts[i] = static_cast<int>(std::floor(quota + 1e-9));
    remainder[i] = quota - counts[i];
    assigned += counts[i];
  }
  std::array<int, kModeCount> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (std::abs(remainder[a] - remainder[b]) > 1e-12) return remainder[a] > remainder[b];
    return a < b;
  });
  for (int k = 0; assigned < n_ues; ++k, ++assigned) ++counts[order[k % kModeCount]];
  return counts;
}

std::vector<MobilityMode> mode_population(int n_ues, std::span<const double> mix) {
  const auto counts = apportion_modes(n_ues, mix);
  std::vector<MobilityMode> out;
  out.reserve(static_cast<std::size_t>(n_ues));
  for (int i = 0; i < kModeCount; ++i)
    out.insert(out.end(), static_cast<std::size_t>(counts[i]), mode_from_index(i));
  return out;
}

Vec2 sample_start_position(RandomStream& stream, double r_inner, double r_outer,
                           const Arena& arena) {
  for (;;) {
    // Area-uniform radius within the annulus.
    const double r = std::sqrt(stream.uniform(r_inner * r_inner, r_outer * r_outer));
    const double a = stream.uniform(-std::numbers::pi, std::numbers::pi);
    const Vec2 p{r * std::cos(a), r * std::sin(a)};
    if (arena.contains(p)) return p;
  }
}

void PopulationConfig::validate() const {
  if (n_ues < 1) throw std::invalid_argument("n_ues must be >= 1");
  if (n_ticks < 2) throw std::invalid_argument("n_ticks must be >= 2");
  if (!(tick_s > 0.0)) throw std::invalid_argument("tick_s must be > 0");
  if (history_ticks < 0) throw std::invalid_argument("history_ticks must be >= 0");
  if (!(arena.x_min < arena.x_max && arena.y_min < arena.y_max)) throw std::invalid_argument("empty arena");
  if (!(start_r_inner_m >= 0.0 && start_r_inner_m <= start_r_outer_m))
    throw std::invalid_argument("start annulus must satisfy 0 <= inner <= outer");
  apportion_modes(n_ues, mix);
  for (const ModeProfile& p : profiles) {
    if (!(p.speed_min >= 0.0 && p.speed_min <= p.speed_max))
      throw std::invalid_argument("profile speed range must satisfy 0 <= min <= max");
    if (!(p.accel_std >= 0.0 && p.bearing_rate_std >= 0.0))
      throw std::invalid_argument("profile noise levels must be >= 0");
    if (!(p.stop_probability >= 0.0 && p.stop_probability <= 1.0) || p.stop_dwell_ticks < 0)
      throw std::invalid_argument("profile stop behaviour out of range");
  }
}

std::vector<Trace> generate_population(const PopulationConfig& config, std::uint64_t seed) {
  config.validate();
  const RandomStream root(seed);
  const auto modes = mode_population(config.n_ues, config.mix);
  std::vector<Trace> traces;
  traces.reserve(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    RandomStream stream = root.split(i);
    TraceOptions opt;
    opt.n_ticks = config.n_ticks + config.history_ticks;
    opt.tick_s = config.tick_s;
    opt.arena = config.arena;
    opt.first_tick = -config.history_ticks;
    opt.start = sample_start_position(stream, config.start_r_inner_m, config.start_r_outer_m, config.arena);
    const MobilityMode mode = modes[i];
    traces.push_back(Trace{static_cast<int>(i), mode,
                           generate_trace(stream, mode, config.profiles[static_cast<std::size_t>(mode_index(mode))], opt)});
  }
  return traces;
}

}  // namespace ahc
