#include "hetsim/safety.hpp"

#include <algorithm>
#include <cmath>

namespace hetsim {

InflatedRect reachable_rect(double ego_radius, const AgentState& neighbor,
                            const WorldConfig& config) {
  // With v_min = -v_max the centre offset (v_min + v_max) * dt / 2 vanishes.
  const double h = config.v_max * config.dt;
  const double inflation = ego_radius + body_radius(neighbor.kind, config) + config.d_safe;
  return {neighbor.pos, {h + inflation, h + inflation}};
}

InflatedDisc reachable_disc(double ego_radius, const AgentState& neighbor,
                            const WorldConfig& config) {
  const double inflation = ego_radius + body_radius(neighbor.kind, config) + config.d_safe;
  return {neighbor.pos, config.v_max * config.dt + inflation};
}

CollisionSet build_collision_set(double ego_radius, std::span<const AgentState> neighbors,
                                 const WorldConfig& config) {
  CollisionSet set;
  for (const AgentState& n : neighbors) {
    if (n.kind == AgentKind::Holonomic) {
      set.rects.push_back(reachable_rect(ego_radius, n, config));
    } else {
      set.discs.push_back(reachable_disc(ego_radius, n, config));
    }
  }
  return set;
}

bool segment_hits_rect(Vec2 p0, Vec2 vel, double horizon, const InflatedRect& rect) {
  double lo = 0.0;
  double hi = horizon;
  const double p[2] = {p0.x, p0.y};
  const double v[2] = {vel.x, vel.y};
  const double c[2] = {rect.center.x, rect.center.y};
  const double h[2] = {rect.half_extent.x, rect.half_extent.y};
  for (int a = 0; a < 2; ++a) {
    const double min_edge = c[a] - h[a];
    const double max_edge = c[a] + h[a];
    if (v[a] == 0.0) {
      if (p[a] < min_edge || p[a] > max_edge) return false;
      continue;
    }
    double t0 = (min_edge - p[a]) / v[a];
    double t1 = (max_edge - p[a]) / v[a];
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    if (lo > hi) return false;
  }
  return true;
}

bool segment_hits_disc(Vec2 p0, Vec2 vel, double horizon, const InflatedDisc& disc) {
  const Vec2 m = p0 - disc.center;
  const double c = dot(m, m) - disc.radius * disc.radius;
  if (c <= 0.0) return true;
  const double a = dot(vel, vel);
  const double half_b = dot(m, vel);
  // Outside at tau = 0 and not approaching: the distance only grows.
  if (a == 0.0 || half_b >= 0.0) return false;
  const double disc_q = half_b * half_b - a * c;
  if (disc_q < 0.0) return false;
  // Entry root; c > 0 and half_b < 0 put both roots at positive tau.
  const double entry = c / (-half_b + std::sqrt(disc_q));
  return entry <= horizon;
}

bool point_in_rect(Vec2 p, const InflatedRect& rect) {
  return std::abs(p.x - rect.center.x) <= rect.half_extent.x &&
         std::abs(p.y - rect.center.y) <= rect.half_extent.y;
}

bool point_in_disc(Vec2 p, const InflatedDisc& disc) {
  const Vec2 m = p - disc.center;
  return dot(m, m) <= disc.radius * disc.radius;
}

HoloCommand braking_force(const AgentState& ego, const WorldConfig& config) {
  // v' = v + (u/m - c_d v) dt = 0  =>  u = m (c_d - 1/dt) v, then clipped.
  const double gain = config.m_mass * (config.c_d - 1.0 / config.dt);
  return HoloCommand(ego.vel * gain, config.u_max);
}

namespace {

template <typename Feasible, typename MakeCmd>
FilterResult run_ladder(Feasible&& feasible, MakeCmd&& make_cmd, SafeCommand fallback) {
  FilterResult out;
  for (std::size_t k = 0; k < kAlphaLadder.size(); ++k) {
    const double alpha = kAlphaLadder[k];
    const bool ok = feasible(alpha);
    out.ladder_verdicts[k] = ok;
    if (ok) {
      out.alpha = alpha;
      out.safe_cmd = make_cmd(alpha);
      out.intervened = alpha < 1.0;
      return out;
    }
  }
  out.alpha = 0.0;
  out.safe_cmd = fallback;
  out.intervened = true;
  out.infeasible_fallback = true;
  return out;
}

}  // namespace

FilterResult filter_holonomic(const AgentState& ego, double ego_radius,
                              const HoloCommand& nominal,
                              std::span<const AgentState> neighbors,
                              const WorldConfig& config) {
  const CollisionSet set = build_collision_set(ego_radius, neighbors, config);
  const double gain = config.dt / (2.0 * config.m_mass);
  auto feasible = [&](double alpha) {
    if (set.empty()) return true;
    const Vec2 vel = ego.vel + nominal.force * (gain * alpha);
    for (const auto& r : set.rects)
      if (segment_hits_rect(ego.pos, vel, config.dt, r)) return false;
    for (const auto& d : set.discs)
      if (segment_hits_disc(ego.pos, vel, config.dt, d)) return false;
    return true;
  };
  auto make_cmd = [&](double alpha) -> SafeCommand {
    HoloCommand c;
    c.force = nominal.force * alpha;
    return c;
  };
  const SafeCommand fallback = config.fallback == FallbackMode::Brake
                                   ? SafeCommand(braking_force(ego, config))
                                   : make_cmd(0.0);
  return run_ladder(feasible, make_cmd, fallback);
}

FilterResult filter_diff_drive(const AgentState& ego, double ego_radius,
                               const DiffCommand& nominal,
                               std::span<const AgentState> neighbors,
                               const WorldConfig& config) {
  const CollisionSet set = build_collision_set(ego_radius, neighbors, config);
  auto feasible = [&](double alpha) {
    if (set.empty()) return true;
    const auto points = unicycle_substep_positions({ego.pos, ego.heading},
                                                   alpha * nominal.lin,
                                                   alpha * nominal.ang, config.dt);
    for (const Vec2& p : points) {
      for (const auto& r : set.rects)
        if (point_in_rect(p, r)) return false;
      for (const auto& d : set.discs)
        if (point_in_disc(p, d)) return false;
    }
    return true;
  };
  auto make_cmd = [&](double alpha) -> SafeCommand {
    DiffCommand c;
    c.lin = alpha * nominal.lin;
    c.ang = alpha * nominal.ang;
    return c;
  };
  return run_ladder(feasible, make_cmd, make_cmd(0.0));
}

}  // namespace hetsim
