#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "ahc/geometry.hpp"
#include "ahc/rng.hpp"

namespace ahc {

enum class MobilityMode : int { kPed = 0, kCyclist, kCar, kBus, kTrain, kDrone, kUav };

inline constexpr int kModeCount = 7;

inline constexpr std::array<MobilityMode, kModeCount> kAllModes = {
    MobilityMode::kPed,   MobilityMode::kCyclist, MobilityMode::kCar, MobilityMode::kBus,
    MobilityMode::kTrain, MobilityMode::kDrone,   MobilityMode::kUav};

constexpr int mode_index(MobilityMode m) { return static_cast<int>(m); }
MobilityMode mode_from_index(int index);

std::string_view mode_name(MobilityMode mode);
/// Accepts the canonical upper-case names ("PED", "CYCLIST", ...), case-insensitive.
MobilityMode parse_mode(std::string_view name);

std::array<double, kModeCount> one_hot(MobilityMode mode);
/// Inverse of one_hot; throws unless exactly one entry is 1 and the rest 0.
MobilityMode from_one_hot(std::span<const double> encoding);

struct Kinematics {
  double speed = 0.0;         // m/s
  double accel = 0.0;         // m/s^2
  double jerk = 0.0;          // m/s^3
  double bearing_rate = 0.0;  // rad/s
};

struct TraceSample {
  int tick = 0;
  Vec2 position;
  Kinematics kin;
  MobilityMode mode = MobilityMode::kPed;
};

struct Trace {
  int ue_id = 0;
  MobilityMode mode = MobilityMode::kPed;
  std::vector<TraceSample> samples;
};

/// Kinematic signature of one mobility mode. Speeds in m/s; `accel_std` is
/// the per-tick speed innovation expressed as an acceleration; the bearing
/// rate is white noise with std `bearing_rate_std`. A nonzero
/// `stop_probability` enables brake/dwell/accelerate stop cycles.
struct ModeProfile {
  bool operator==(const ModeProfile&) const = default;

  double speed_min = 0.5;
  double speed_max = 2.0;
  double accel_std = 0.3;
  double bearing_rate_std = 0.3;
  double speed_reversion = 0.5;     // 1/s pull toward the cruise target
  double target_change_prob = 0.02;  // per tick
  double stop_probability = 0.0;     // per cruising tick
  int stop_dwell_ticks = 0;
  double stop_decel = 1.5;  // m/s^2 during braking and pull-away
};

using ProfileTable = std::array<ModeProfile, kModeCount>;

ModeProfile default_profile(MobilityMode mode);
ProfileTable default_profiles();

/// Axis-aligned movement area; trajectories reflect at its edges.
struct Arena {
  bool operator==(const Arena&) const = default;

  double x_min = -1600.0;
  double x_max = 1600.0;
  double y_min = -1600.0;
  double y_max = 1600.0;

  bool contains(Vec2 p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

struct TraceOptions {
  int n_ticks = 200;
  double tick_s = 0.1;
  Arena arena;
  int first_tick = 0;
  Vec2 start;
  double start_heading = 0.0;
  bool random_heading = true;
};

/// Correlated random walk for one UE. Kinematics are re-derived from the
/// emitted positions so they match what an observer of the trace would
/// compute. Requires n_ticks >= 2.
std::vector<TraceSample> generate_trace(RandomStream& stream, MobilityMode mode,
                                        const ModeProfile& profile, const TraceOptions& options);

/// Finite-difference kinematics. Entries before enough history exists are
/// zero (speed from index 1, accel and bearing rate from 2, jerk from 3).
/// Throws std::invalid_argument("insufficient history") for < 4 positions.
std::vector<Kinematics> derive_kinematics(std::span<const Vec2> positions, double tick_s);

/// Largest-remainder apportionment of `n_ues` over the mode mix; remainder
/// ties go to the lower mode index.
std::array<int, kModeCount> apportion_modes(int n_ues, std::span<const double> mix);

/// Per-UE mode assignment in mode order (all PED first, then CYCLIST, ...).
std::vector<MobilityMode> mode_population(int n_ues, std::span<const double> mix);

/// Uniform start position inside the annulus [r_inner, r_outer] centred at
/// the origin, clipped to the arena by rejection.
Vec2 sample_start_position(RandomStream& stream, double r_inner, double r_outer,
                           const Arena& arena);

struct PopulationConfig {
  bool operator==(const PopulationConfig&) const = default;

  int n_ues = 100;
  int n_ticks = 200;
  double tick_s = 0.1;
  std::array<double, kModeCount> mix{1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7, 1.0 / 7};
  ProfileTable profiles = default_profiles();
  Arena arena;
  double start_r_inner_m = 500.0;
  double start_r_outer_m = 1500.0;
  int history_ticks = 0;  // extra ticks emitted before tick 0 (ticks -history..-1)

  void validate() const;
};

/// Traces for a whole run. UE i draws from RandomStream(seed).split(i), so a
/// UE's trace does not depend on the population size.
std::vector<Trace> generate_population(const PopulationConfig& config, std::uint64_t seed);

}  // namespace ahc
