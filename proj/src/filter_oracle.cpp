#include "hetsim/filter_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hetsim {

double rect_depth(Vec2 p, const InflatedRect& rect) {
  return std::min(rect.half_extent.x - std::abs(p.x - rect.center.x),
                  rect.half_extent.y - std::abs(p.y - rect.center.y));
}

double disc_depth(Vec2 p, const InflatedDisc& disc) {
  return disc.radius - distance(p, disc.center);
}

namespace {

// Sets rebuilt from the configuration so the oracle shares no code with the
// analytic construction.
struct OracleSets {
  std::vector<InflatedRect> rects;
  std::vector<InflatedDisc> discs;
};

OracleSets oracle_sets(double ego_radius, std::span<const AgentState> neighbors,
                       const WorldConfig& config) {
  OracleSets s;
  for (const AgentState& n : neighbors) {
    const double other = n.kind == AgentKind::Holonomic ? config.r_h : config.r_d;
    const double reach = config.v_max * config.dt + ego_radius + other + config.d_safe;
    if (n.kind == AgentKind::Holonomic) {
      s.rects.push_back({n.pos, {reach, reach}});
    } else {
      s.discs.push_back({n.pos, reach});
    }
  }
  return s;
}

// Maximum of a concave function on [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return std::max({f(lo), f(hi), fc, fd});
}

// Max over tau in [0, horizon] of depth(p0 + vel * tau).
template <typename Depth>
double max_depth_on_segment(Vec2 p0, Vec2 vel, double horizon, int samples, Depth&& depth) {
  auto f = [&](double tau) { return depth(p0 + vel * tau); };
  const double step = horizon / (samples - 1);
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const double v = f(k == samples - 1 ? horizon : k * step);
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  const double lo = std::max(0, best - 1) * step;
  const double hi = std::min(horizon, (best + 1) * step);
  return std::max(best_val, golden_max(f, lo, hi));
}

SafeCommand scaled(const HoloCommand& u, double alpha) {
  HoloCommand c;
  c.force = {u.force.x * alpha, u.force.y * alpha};
  return c;
}

SafeCommand scaled(const DiffCommand& u, double alpha) {
  DiffCommand c;
  c.lin = alpha * u.lin;
  c.ang = alpha * u.ang;
  return c;
}

void check_samples(const OracleOptions& o) {
  if (o.samples < 1000) throw std::invalid_argument("oracle needs at least 1000 samples");
}

struct Pose2 {
  double x, y, th;
};

// Plain RK4 on the unicycle field, independent of the dynamics module.
Pose2 fine_rk4(Pose2 s, double v, double w, double h) {
  auto f = [&](const Pose2& q) { return Pose2{v * std::cos(q.th), v * std::sin(q.th), w}; };
  const Pose2 k1 = f(s);
  const Pose2 k2 = f({s.x + h / 2 * k1.x, s.y + h / 2 * k1.y, s.th + h / 2 * k1.th});
  const Pose2 k3 = f({s.x + h / 2 * k2.x, s.y + h / 2 * k2.y, s.th + h / 2 * k2.th});
  const Pose2 k4 = f({s.x + h * k3.x, s.y + h * k3.y, s.th + h * k3.th});
  return {s.x + h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
          s.y + h / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
          s.th + h / 6 * (k1.th + 2 * k2.th + 2 * k3.th + k4.th)};
}

}  // namespace

OracleResult oracle_filter_holonomic(const AgentState& ego, double ego_radius,
                                     const HoloCommand& nominal,
                                     std::span<const AgentState> neighbors,
                                     const WorldConfig& config, const OracleOptions& options) {
  check_samples(options);
  const OracleSets sets = oracle_sets(ego_radius, neighbors, config);
  OracleResult out;
  out.clearance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < kAlphaLadder.size(); ++k) {
    const double alpha = kAlphaLadder[k];
    const Vec2 vel{ego.vel.x + config.dt / (2.0 * config.m_mass) * alpha * nominal.force.x,
                   ego.vel.y + config.dt / (2.0 * config.m_mass) * alpha * nominal.force.y};
    bool feasible = true;
    for (const auto& r : sets.rects) {
      const double depth = max_depth_on_segment(ego.pos, vel, config.dt, options.samples,
                                                [&](Vec2 p) { return rect_depth(p, r); });
      out.clearance = std::min(out.clearance, std::abs(depth));
      if (depth >= 0.0) feasible = false;
    }
    for (const auto& d : sets.discs) {
      const double depth = max_depth_on_segment(ego.pos, vel, config.dt, options.samples,
                                                [&](Vec2 p) { return disc_depth(p, d); });
      out.clearance = std::min(out.clearance, std::abs(depth));
      if (depth >= 0.0) feasible = false;
    }
    out.result.ladder_verdicts[k] = feasible;
    if (feasible) {
      out.result.alpha = alpha;
      out.result.safe_cmd = scaled(nominal, alpha);
      out.result.intervened = alpha < 1.0;
      return out;
    }
  }
  out.result.alpha = 0.0;
  out.result.safe_cmd = config.fallback == FallbackMode::Brake ? SafeCommand(braking_force(ego, config))
                                                               : scaled(nominal, 0.0);
  out.result.intervened = true;
  out.result.infeasible_fallback = true;
  return out;
}

OracleResult oracle_filter_diff_drive(const AgentState& ego, double ego_radius,
                                      const DiffCommand& nominal,
                                      std::span<const AgentState> neighbors,
                                      const WorldConfig& config, const OracleOptions& options) {
  check_samples(options);
  const OracleSets sets = oracle_sets(ego_radius, neighbors, config);
  OracleResult out;
  out.clearance = std::numeric_limits<double>::infinity();
  const double substep = config.dt / kDiffDriveSubsteps;

  auto depth_at = [&](double x, double y) {
    double depth = -std::numeric_limits<double>::infinity();
    for (const auto& r : sets.rects) depth = std::max(depth, rect_depth({x, y}, r));
    for (const auto& d : sets.discs) depth = std::max(depth, disc_depth({x, y}, d));
    return depth;
  };

  for (std::size_t k = 0; k < kAlphaLadder.size(); ++k) {
    const double alpha = kAlphaLadder[k];
    const double v = alpha * nominal.lin;
    const double w = alpha * nominal.ang;
    bool feasible = true;
    bool path_enters = false;
    Pose2 pose{ego.pos.x, ego.pos.y, ego.heading};
    for (int s = 0; s < kDiffDriveSubsteps; ++s) {
      // Dense samples of the continuous path inside this substep.
      if (!sets.rects.empty() || !sets.discs.empty()) {
        Pose2 probe = pose;
        const double h = substep / options.path_samples;
        for (int q = 1; q < options.path_samples; ++q) {
          probe = fine_rk4(probe, v, w, h);
          if (depth_at(probe.x, probe.y) >= 0.0) path_enters = true;
        }
      }
      for (int m = 0; m < options.micro_steps; ++m)
        pose = fine_rk4(pose, v, w, substep / options.micro_steps);
      for (const auto& r : sets.rects) {
        const double depth = rect_depth({pose.x, pose.y}, r);
        out.clearance = std::min(out.clearance, std::abs(depth));
        if (depth >= 0.0) feasible = false;
      }
      for (const auto& d : sets.discs) {
        const double depth = disc_depth({pose.x, pose.y}, d);
        out.clearance = std::min(out.clearance, std::abs(depth));
        if (depth >= 0.0) feasible = false;
      }
    }
    out.result.ladder_verdicts[k] = feasible;
    if (feasible) {
      out.result.alpha = alpha;
      out.result.safe_cmd = scaled(nominal, alpha);
      out.result.intervened = alpha < 1.0;
      out.substep_gap = path_enters;
      return out;
    }
  }
  out.result.alpha = 0.0;
  out.result.safe_cmd = scaled(nominal, 0.0);
  out.result.intervened = true;
  out.result.infeasible_fallback = true;
  return out;
}

}  // namespace hetsim
