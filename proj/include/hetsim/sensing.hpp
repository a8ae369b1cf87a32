#pragma once

#include <span>
#include <vector>

#include "hetsim/world.hpp"

namespace hetsim {

// Reading reported when the ray origin lies inside a target disc.
inline constexpr double kInsideReading = 1e-6;

struct RangeScan {
  std::vector<double> readings;
};

// Distance along the unit direction `dir` from `origin` to the first point of
// the disc, or +inf on a miss. Zero when the origin is inside the disc.
double ray_disc_distance(Vec2 origin, Vec2 dir, Vec2 center, double radius);

// Ray k points at frame_angle + 2*pi*k/n_rays.
double ray_angle(int k, int n_rays, double frame_angle);

// Casts n_rays rays against every target disc (covered or not) and clamps
// each reading to (0, max_range].
RangeScan ray_cast(Vec2 origin, double frame_angle, std::span<const Target> targets,
                   int n_rays, double target_radius, double max_range);

// Holonomic scans are world-aligned; diff-drive scans start at the heading.
RangeScan ray_cast(const AgentState& agent, std::span<const Target> targets,
                   const WorldConfig& config);

}  // namespace hetsim
