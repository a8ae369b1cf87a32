#include "hetsim/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace hetsim {

HoloCommand::HoloCommand(Vec2 f, double u_max)
    : force{std::clamp(f.x, -u_max, u_max), std::clamp(f.y, -u_max, u_max)} {}

DiffCommand::DiffCommand(double l, double a, double u_max)
    : lin(std::clamp(l, -u_max, u_max)), ang(std::clamp(a, -u_max, u_max)) {}

AgentState step_holonomic(const AgentState& state, const HoloCommand& cmd,
                          const WorldConfig& config) {
  AgentState next = state;
  const double dt = config.dt;
  next.pos.x = state.pos.x + state.vel.x * dt;
  next.pos.y = state.pos.y + state.vel.y * dt;
  next.vel.x = state.vel.x + (cmd.force.x / config.m_mass - config.c_d * state.vel.x) * dt;
  next.vel.y = state.vel.y + (cmd.force.y / config.m_mass - config.c_d * state.vel.y) * dt;
  next.vel.x = std::clamp(next.vel.x, -config.v_max, config.v_max);
  next.vel.y = std::clamp(next.vel.y, -config.v_max, config.v_max);
  return next;
}

namespace {

struct PoseRate {
  double dx, dy, dtheta;
};

inline PoseRate unicycle_rate(double heading, double lin, double ang) {
  return {lin * std::cos(heading), lin * std::sin(heading), ang};
}

inline void rk4_step(Pose& p, double lin, double ang, double h) {
  const PoseRate k1 = unicycle_rate(p.heading, lin, ang);
  const PoseRate k2 = unicycle_rate(p.heading + 0.5 * h * k1.dtheta, lin, ang);
  const PoseRate k3 = unicycle_rate(p.heading + 0.5 * h * k2.dtheta, lin, ang);
  const PoseRate k4 = unicycle_rate(p.heading + h * k3.dtheta, lin, ang);
  p.pos.x += h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  p.pos.y += h / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
  p.heading += h / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta);
}

}  // namespace

Pose integrate_unicycle(Pose start, double lin, double ang, double duration,
                        int substeps) {
  const double h = duration / substeps;
  for (int k = 0; k < substeps; ++k) rk4_step(start, lin, ang, h);
  return start;
}

std::array<Vec2, kDiffDriveSubsteps> unicycle_substep_positions(Pose start, double lin,
                                                                double ang, double dt) {
  std::array<Vec2, kDiffDriveSubsteps> out{};
  const double h = dt / kDiffDriveSubsteps;
  for (int k = 0; k < kDiffDriveSubsteps; ++k) {
    rk4_step(start, lin, ang, h);
    out[k] = start.pos;
  }
  return out;
}

AgentState step_diff_drive(const AgentState& state, const DiffCommand& cmd,
                           const WorldConfig& config) {
  const Pose end = integrate_unicycle({state.pos, state.heading}, cmd.lin, cmd.ang,
                                      config.dt, kDiffDriveSubsteps);
  AgentState next = state;
  next.pos = end.pos;
  next.heading = wrap_angle(end.heading);
  next.speed = cmd.lin;
  next.omega = cmd.ang;
  return next;
}

AgentState clamp_to_workspace(const AgentState& state, const WorldConfig& config) {
  AgentState out = state;
  bool hit = false;
  auto clamp_axis = [&](double& p, double& v) {
    if (p < 0.0) {
      p = 0.0;
      if (v < 0.0) v = 0.0;
      hit = true;
    } else if (p > config.d) {
      p = config.d;
      if (v > 0.0) v = 0.0;
      hit = true;
    }
  };
  clamp_axis(out.pos.x, out.vel.x);
  clamp_axis(out.pos.y, out.vel.y);
  if (hit && out.kind == AgentKind::DiffDrive) out.speed = 0.0;
  return out;
}

}  // namespace hetsim
