#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetsim/rng.hpp"
#include "hetsim/vec2.hpp"

namespace hetsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RewardPreset { R1, R2, R3, R4 };
enum class DistanceSign { Intent, Literal };
// What a holonomic agent executes when no ladder rung is feasible.
enum class FallbackMode { Brake, Drift };

RewardPreset parse_preset(const std::string& name);
std::string to_string(RewardPreset p);

// Scenario parameters. Defaults reproduce the reference team of two
// holonomic agents, one differential-drive agent and three targets.
struct WorldConfig {
  int n_h = 2;
  int n_d = 1;
  int n_t = 3;
  double d = 10.0;
  double r_h = 0.5;
  double r_d = 0.5;
  double r_h_l = 3.0;
  double r_d_l = 1.5;
  int n_l = 16;
  double rho_cov = 1.5;
  double d_safe = 0.05;
  double r_c = 4.5;
  int d_c = 16;
  double m_mass = 1.0;
  double dt = 0.1;
  double c_d = 0.25;
  double u_max = 1.0;
  double v_max = 10.0;
  int max_steps = 100;
  double target_radius = 0.1;

  // Reward shaping.
  double w_dist = 1.0;
  double w_goal = 1.0;
  double w_coll = 1.0;
  double w_comm = 0.1;
  double r_goal = 10.0;
  double r_coll = -8.0;
  RewardPreset preset = RewardPreset::R4;
  DistanceSign distance_sign = DistanceSign::Intent;

  bool safety_filter = true;
  FallbackMode fallback = FallbackMode::Brake;

  int n_agents() const { return n_h + n_d; }
  // Throws ConfigError on the first violated constraint.
  void validate() const;
};

// Parses a flat `key = value` document. Keys mirror WorldConfig members;
// `#` starts a comment. Unknown keys and malformed values are errors.
WorldConfig parse_config(const std::string& text);
WorldConfig load_config(const std::string& path);
std::string format_config(const WorldConfig& config);

enum class AgentKind { Holonomic, DiffDrive };

struct AgentState {
  AgentKind kind = AgentKind::Holonomic;
  Vec2 pos;
  Vec2 vel;              // holonomic only
  double heading = 0.0;  // diff-drive only, (-pi, pi]
  double speed = 0.0;    // diff-drive linear speed
  double omega = 0.0;    // diff-drive angular speed

  static AgentState holonomic(Vec2 p, Vec2 v = {}) {
    return {AgentKind::Holonomic, p, v, 0.0, 0.0, 0.0};
  }
  static AgentState diff_drive(Vec2 p, double heading, double speed = 0.0,
                               double omega = 0.0) {
    return {AgentKind::DiffDrive, p, {}, wrap_angle(heading), speed, omega};
  }

  // World-frame velocity for either kind.
  Vec2 world_velocity() const;

  bool operator==(const AgentState&) const = default;
};

double body_radius(AgentKind kind, const WorldConfig& config);
double sensor_range(AgentKind kind, const WorldConfig& config);

struct Target {
  Vec2 pos;
  bool covered = false;
  std::optional<int> covered_at;
  std::optional<int> covered_by;

  bool operator==(const Target&) const = default;
};

struct EpisodeState {
  int step = 0;
  std::vector<AgentState> agents;  // holonomic first, then diff-drive
  std::vector<Target> targets;
  std::vector<std::vector<double>> prev_messages;
  Rng rng;
  bool done = false;

  bool operator==(const EpisodeState&) const = default;
};

EpisodeState init_episode(const WorldConfig& config, std::uint64_t seed);

struct CoverageEvent {
  int target = 0;
  int agent = 0;
  int step = 0;
};

// Marks targets within rho_cov of some agent as covered (inclusive bound)
// and returns the newly covered ones. The recorded agent is the one at the
// minimum distance, lowest index on ties.
std::vector<CoverageEvent> check_coverage(EpisodeState& state,
                                          const WorldConfig& config);

}  // namespace hetsim
