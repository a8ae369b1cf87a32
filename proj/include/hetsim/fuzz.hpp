#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hetsim/filter_oracle.hpp"

namespace hetsim {

// One randomly generated filter problem: an ego agent, its nominal command
// and 0-4 nearby neighbours.
struct FilterInstance {
  std::uint64_t seed = 0;
  AgentState ego;
  Vec2 command;  // raw (force) or (lin, ang), clipped by the filter call
  std::vector<AgentState> neighbors;
};

FilterInstance random_filter_instance(std::uint64_t instance_seed, const WorldConfig& config);

struct FuzzRow {
  std::uint64_t instance_seed = 0;
  AgentKind ego_kind = AgentKind::Holonomic;
  int neighbors = 0;
  double analytic_alpha = 0.0;
  double oracle_alpha = 0.0;
  double clearance = 0.0;
  bool substep_gap = false;

  bool agree() const { return analytic_alpha == oracle_alpha; }
};

struct FuzzReport {
  std::vector<FuzzRow> rows;
  int disagreements = 0;           // with clearance > tolerance
  int boundary_disagreements = 0;  // with clearance <= tolerance
  int boundary_instances = 0;      // clearance <= tolerance
  int substep_gaps = 0;
  double max_disagreement_clearance = 0.0;
};

FuzzRow compare_filters(const FilterInstance& instance, const WorldConfig& config,
                        const OracleOptions& options = {});

// Instance k uses seed splitmix64(seed + k).
FuzzReport fuzz_filter(int instances, std::uint64_t seed, double tolerance,
                       const WorldConfig& config, const OracleOptions& options = {});

void write_fuzz_report(std::ostream& out, const FuzzReport& report);

}  // namespace hetsim
