#include "hetsim/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hetsim {

double ray_disc_distance(Vec2 origin, Vec2 dir, Vec2 center, double radius) {
  // |origin + s*dir - center|^2 = radius^2 with |dir| = 1.
  const Vec2 m = origin - center;
  const double c = dot(m, m) - radius * radius;
  if (c <= 0.0) return 0.0;
  const double b = dot(m, dir);
  if (b >= 0.0) return std::numeric_limits<double>::infinity();
  const double disc = b * b - c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  // Nearer root written to avoid cancellation: s = c / (-b + sqrt(disc)).
  return c / (-b + std::sqrt(disc));
}

double ray_angle(int k, int n_rays, double frame_angle) {
  return frame_angle + 2.0 * std::numbers::pi * k / n_rays;
}

RangeScan ray_cast(Vec2 origin, double frame_angle, std::span<const Target> targets,
                   int n_rays, double target_radius, double max_range) {
  RangeScan scan;
  scan.readings.resize(n_rays);
  for (int k = 0; k < n_rays; ++k) {
    const Vec2 dir = unit_from_angle(ray_angle(k, n_rays, frame_angle));
    double best = std::numeric_limits<double>::infinity();
    for (const Target& t : targets)
      best = std::min(best, ray_disc_distance(origin, dir, t.pos, target_radius));
    scan.readings[k] = std::clamp(best, kInsideReading, max_range);
  }
  return scan;
}

RangeScan ray_cast(const AgentState& agent, std::span<const Target> targets,
                   const WorldConfig& config) {
  const double frame = agent.kind == AgentKind::DiffDrive ? agent.heading : 0.0;
  return ray_cast(agent.pos, frame, targets, config.n_l, config.target_radius,
                  sensor_range(agent.kind, config));
}

}  // namespace hetsim
