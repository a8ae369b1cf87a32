#include "hetsim/fuzz.hpp"

#include <algorithm>
#include <numbers>
#include <ostream>

#include "hetsim/rng.hpp"

namespace hetsim {

FilterInstance random_filter_instance(std::uint64_t instance_seed, const WorldConfig& config) {
  Rng rng(instance_seed);
  FilterInstance inst;
  inst.seed = instance_seed;
  const Vec2 origin{rng.uniform(0.0, config.d), rng.uniform(0.0, config.d)};
  // Commands slightly beyond the bound so clipping is exercised.
  const double cmd = 1.5 * config.u_max;
  if (rng.uniform() < 0.5) {
    // Holonomic speeds mostly in the drag-limited regime, sometimes at v_max.
    const double vscale = rng.uniform() < 0.8 ? config.u_max / std::max(config.c_d, 0.1)
                                             : config.v_max;
    inst.ego = AgentState::holonomic(origin, {rng.uniform(-vscale, vscale),
                                              rng.uniform(-vscale, vscale)});
  } else {
    inst.ego = AgentState::diff_drive(origin, rng.uniform(-std::numbers::pi, std::numbers::pi),
                                      rng.uniform(-config.u_max, config.u_max),
                                      rng.uniform(-config.u_max, config.u_max));
  }
  inst.command = {rng.uniform(-cmd, cmd), rng.uniform(-cmd, cmd)};

  const int count = static_cast<int>(rng.below(5));
  const double reach = config.v_max * config.dt + config.r_h + config.r_d + config.d_safe;
  for (int k = 0; k < count; ++k) {
    const double angle = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double dist = rng.uniform(0.5, 1.6 * reach);
    const Vec2 p = origin + unit_from_angle(angle) * dist;
    if (rng.uniform() < 0.5) {
      inst.neighbors.push_back(AgentState::holonomic(p));
    } else {
      inst.neighbors.push_back(
          AgentState::diff_drive(p, rng.uniform(-std::numbers::pi, std::numbers::pi)));
    }
  }
  return inst;
}

FuzzRow compare_filters(const FilterInstance& inst, const WorldConfig& config,
                        const OracleOptions& options) {
  FuzzRow row;
  row.instance_seed = inst.seed;
  row.ego_kind = inst.ego.kind;
  row.neighbors = static_cast<int>(inst.neighbors.size());
  const double radius = body_radius(inst.ego.kind, config);
  if (inst.ego.kind == AgentKind::Holonomic) {
    const HoloCommand u(inst.command, config.u_max);
    row.analytic_alpha = filter_holonomic(inst.ego, radius, u, inst.neighbors, config).alpha;
    const OracleResult o = oracle_filter_holonomic(inst.ego, radius, u, inst.neighbors, config,
                                                   options);
    row.oracle_alpha = o.result.alpha;
    row.clearance = o.clearance;
  } else {
    const DiffCommand u(inst.command.x, inst.command.y, config.u_max);
    row.analytic_alpha = filter_diff_drive(inst.ego, radius, u, inst.neighbors, config).alpha;
    const OracleResult o = oracle_filter_diff_drive(inst.ego, radius, u, inst.neighbors, config,
                                                    options);
    row.oracle_alpha = o.result.alpha;
    row.clearance = o.clearance;
    row.substep_gap = o.substep_gap;
  }
  return row;
}

FuzzReport fuzz_filter(int instances, std::uint64_t seed, double tolerance,
                       const WorldConfig& config, const OracleOptions& options) {
  FuzzReport report;
  report.rows.reserve(std::max(instances, 0));
  for (int k = 0; k < instances; ++k) {
    const FilterInstance inst = random_filter_instance(splitmix64(seed + k), config);
    FuzzRow row = compare_filters(inst, config, options);
    const bool boundary = row.clearance <= tolerance;
    if (boundary) ++report.boundary_instances;
    if (row.substep_gap) ++report.substep_gaps;
    if (!row.agree()) {
      if (boundary) {
        ++report.boundary_disagreements;
      } else {
        ++report.disagreements;
      }
      report.max_disagreement_clearance =
          std::max(report.max_disagreement_clearance, row.clearance);
    }
    report.rows.push_back(row);
  }
  return report;
}

void write_fuzz_report(std::ostream& out, const FuzzReport& report) {
  out << "instance,instance_seed,ego_kind,neighbors,analytic_alpha,oracle_alpha,clearance,"
         "substep_gap,agree\n";
  for (std::size_t k = 0; k < report.rows.size(); ++k) {
    const FuzzRow& r = report.rows[k];
    out << k << ',' << r.instance_seed << ','
        << (r.ego_kind == AgentKind::Holonomic ? "holonomic" : "diff_drive") << ','
        << r.neighbors << ',' << r.analytic_alpha << ',' << r.oracle_alpha << ',' << r.clearance
        << ',' << (r.substep_gap ? 1 : 0) << ',' << (r.agree() ? 1 : 0) << '\n';
  }
}

}  // namespace hetsim
