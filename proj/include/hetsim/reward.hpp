#pragma once

#include <span>
#include <vector>

#include "hetsim/world.hpp"

namespace hetsim {

struct RewardWeights {
  double w_dist = 1.0;
  double w_goal = 1.0;
  double w_coll = 1.0;
  double w_comm = 0.1;
  double r_goal = 10.0;
  double r_coll = -8.0;

  static RewardWeights from(const WorldConfig& c) {
    return {c.w_dist, c.w_goal, c.w_coll, c.w_comm, c.r_goal, c.r_coll};
  }
};

struct RewardTerms {
  double dist = 0.0;
  double goal = 0.0;
  double coll = 0.0;
  double comm = 0.0;
};

// Change in distance to the nearest target between two steps. The intent sign
// is positive when approaching; the literal sign is now - prev. Each minimum
// is taken independently. Zero when there are no targets.
double distance_term(Vec2 pos_now, Vec2 pos_prev, std::span<const Target> targets_now,
                     std::span<const Target> targets_prev,
                     DistanceSign sign = DistanceSign::Intent);

// r_goal for every coverage event credited to `agent`.
double goal_term(std::span<const CoverageEvent> events, int agent, double r_goal);

// r_coll for every other agent whose body strictly overlaps agent's body.
double collision_term(int agent, std::span<const AgentState> agents,
                      const WorldConfig& config);

// Cosine similarity, defined as 0 when either norm is below 1e-9.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Sum over j != agent of 1 - cos^2(c_agent, c_j).
double comm_term(int agent, std::span<const std::vector<double>> messages);

// Terms with the components excluded by the preset zeroed.
RewardTerms mask_terms(const RewardTerms& terms, RewardPreset preset);

double total_reward(const RewardTerms& terms, const RewardWeights& weights,
                    RewardPreset preset);

}  // namespace hetsim
