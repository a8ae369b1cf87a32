#pragma once

#include <array>
#include <optional>
#include <span>
#include <variant>

#include "hetsim/dynamics.hpp"
#include "hetsim/world.hpp"

namespace hetsim {

// Command scalings tried by the filters, largest first.
inline constexpr std::array<double, 7> kAlphaLadder{1.0, 0.8, 0.6, 0.4, 0.25, 0.1, 0.0};

// Axis-aligned box |x - center|_inf <= half_extent (componentwise).
struct InflatedRect {
  Vec2 center;
  Vec2 half_extent;
};

// Closed disc |x - center| <= radius.
struct InflatedDisc {
  Vec2 center;
  double radius = 0.0;
};

// Union of every neighbour's inflated reachable set for one ego agent.
struct CollisionSet {
  std::vector<InflatedRect> rects;
  std::vector<InflatedDisc> discs;

  bool empty() const { return rects.empty() && discs.empty(); }
};

// Worst-case one-step reachable box of a holonomic neighbour under per-axis
// speed bound v_max, inflated by both radii and d_safe.
InflatedRect reachable_rect(double ego_radius, const AgentState& neighbor,
                            const WorldConfig& config);

// One-step reachable disc of a diff-drive neighbour under isotropic speed
// bound v_max, inflated by both radii and d_safe.
InflatedDisc reachable_disc(double ego_radius, const AgentState& neighbor,
                            const WorldConfig& config);

CollisionSet build_collision_set(double ego_radius, std::span<const AgentState> neighbors,
                                 const WorldConfig& config);

// Closed-set tests for the segment p0 + vel * tau, tau in [0, horizon].
bool segment_hits_rect(Vec2 p0, Vec2 vel, double horizon, const InflatedRect& rect);
bool segment_hits_disc(Vec2 p0, Vec2 vel, double horizon, const InflatedDisc& disc);

bool point_in_rect(Vec2 p, const InflatedRect& rect);
bool point_in_disc(Vec2 p, const InflatedDisc& disc);

using SafeCommand = std::variant<HoloCommand, DiffCommand>;

struct FilterResult {
  double alpha = 1.0;
  SafeCommand safe_cmd;
  // Verdict per ladder rung; rungs below the chosen one are not evaluated.
  std::array<std::optional<bool>, kAlphaLadder.size()> ladder_verdicts{};
  bool intervened = false;           // alpha < 1
  bool infeasible_fallback = false;  // no rung feasible, alpha = 0 executed anyway
};

// Force that drives the velocity to zero as fast as |u| <= u_max allows.
HoloCommand braking_force(const AgentState& ego, const WorldConfig& config);

// Largest ladder rung whose straight-line ego prediction
// p + (v + dt/(2m) * alpha * u) * tau misses every set for tau in [0, dt].
// With no feasible rung alpha is 0 and the agent brakes (or coasts, with
// FallbackMode::Drift).
FilterResult filter_holonomic(const AgentState& ego, double ego_radius,
                              const HoloCommand& nominal,
                              std::span<const AgentState> neighbors,
                              const WorldConfig& config);

// Largest ladder rung whose five RK4 substep positions under the scaled
// (lin, ang) command all lie outside every set.
FilterResult filter_diff_drive(const AgentState& ego, double ego_radius,
                               const DiffCommand& nominal,
                               std::span<const AgentState> neighbors,
                               const WorldConfig& config);

}  // namespace hetsim
