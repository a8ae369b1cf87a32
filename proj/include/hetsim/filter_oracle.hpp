#pragma once

#include <span>

#include "hetsim/safety.hpp"

namespace hetsim {

// Brute-force counterpart of the analytic filters, used for verification.
//
// Holonomic: the ego prediction is sampled at `samples` uniform times in
// [0, dt]. For every set the penetration depth (inside > 0, outside < 0) is
// concave in tau, so the best sample is polished with a golden-section search
// over its two neighbouring intervals.
//
// Diff-drive: the five substep positions are recomputed with `micro_steps`
// RK4 steps per substep and tested pointwise, as the analytic filter does.
// The continuous path is also sampled densely to measure how often the
// pointwise check misses a set between substeps.
struct OracleResult {
  FilterResult result;
  // Smallest |penetration depth| over every evaluated rung and set; small
  // values mean the instance sits on a set boundary.
  double clearance = 0.0;
  // Diff-drive only: some rung was accepted while its continuous path
  // entered a set between substep positions.
  bool substep_gap = false;
};

struct OracleOptions {
  int samples = 2001;      // >= 1000
  int micro_steps = 64;    // RK4 steps per diff-drive substep
  int path_samples = 200;  // continuous-path samples per diff-drive substep
};

// Signed depth of p inside the set: positive inside, zero on the boundary.
double rect_depth(Vec2 p, const InflatedRect& rect);
double disc_depth(Vec2 p, const InflatedDisc& disc);

OracleResult oracle_filter_holonomic(const AgentState& ego, double ego_radius,
                                     const HoloCommand& nominal,
                                     std::span<const AgentState> neighbors,
                                     const WorldConfig& config,
                                     const OracleOptions& options = {});

OracleResult oracle_filter_diff_drive(const AgentState& ego, double ego_radius,
                                      const DiffCommand& nominal,
                                      std::span<const AgentState> neighbors,
                                      const WorldConfig& config,
                                      const OracleOptions& options = {});

}  // namespace hetsim
