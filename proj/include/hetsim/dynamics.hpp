#pragma once

#include <array>

#include "hetsim/world.hpp"

namespace hetsim {

// Force command for a holonomic agent; components clipped to [-u_max, u_max].
struct HoloCommand {
  Vec2 force;

  HoloCommand() = default;
  HoloCommand(Vec2 f, double u_max);
};

// Linear and angular speed command for a differential-drive agent.
struct DiffCommand {
  double lin = 0.0;
  double ang = 0.0;

  DiffCommand() = default;
  DiffCommand(double lin, double ang, double u_max);
};

inline constexpr int kDiffDriveSubsteps = 5;

// Explicit-Euler state update, position first with the old velocity, then a
// per-axis clamp of the new velocity to [-v_max, v_max].
AgentState step_holonomic(const AgentState& state, const HoloCommand& cmd,
                          const WorldConfig& config);

// Unicycle pose after integrating constant (lin, ang) over `duration` with
// `substeps` classical RK4 steps.
struct Pose {
  Vec2 pos;
  double heading = 0.0;
};
Pose integrate_unicycle(Pose start, double lin, double ang, double duration,
                        int substeps);

// Positions after each of the kDiffDriveSubsteps RK4 substeps over dt.
std::array<Vec2, kDiffDriveSubsteps> unicycle_substep_positions(
    Pose start, double lin, double ang, double dt);

AgentState step_diff_drive(const AgentState& state, const DiffCommand& cmd,
                           const WorldConfig& config);

// Clamps the position into [0, d]^2, zeroing the velocity component that
// pushed it out (holonomic) or the linear speed (diff-drive).
AgentState clamp_to_workspace(const AgentState& state, const WorldConfig& config);

}  // namespace hetsim
