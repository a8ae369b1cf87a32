#include "hetsim/reward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hetsim {

namespace {

double nearest_target_distance(Vec2 p, std::span<const Target> targets) {
  double best = std::numeric_limits<double>::infinity();
  for (const Target& t : targets) best = std::min(best, distance(p, t.pos));
  return best;
}

}  // namespace

double distance_term(Vec2 pos_now, Vec2 pos_prev, std::span<const Target> targets_now,
                     std::span<const Target> targets_prev, DistanceSign sign) {
  if (targets_now.empty() || targets_prev.empty()) return 0.0;
  const double now = nearest_target_distance(pos_now, targets_now);
  const double prev = nearest_target_distance(pos_prev, targets_prev);
  return sign == DistanceSign::Intent ? prev - now : now - prev;
}

double goal_term(std::span<const CoverageEvent> events, int agent, double r_goal) {
  double r = 0.0;
  for (const CoverageEvent& e : events)
    if (e.agent == agent) r += r_goal;
  return r;
}

double collision_term(int agent, std::span<const AgentState> agents,
                      const WorldConfig& config) {
  double r = 0.0;
  const AgentState& me = agents[agent];
  const double my_radius = body_radius(me.kind, config);
  for (std::size_t j = 0; j < agents.size(); ++j) {
    if (static_cast<int>(j) == agent) continue;
    if (distance(me.pos, agents[j].pos) < my_radius + body_radius(agents[j].kind, config))
      r += config.r_coll;
  }
  return r;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  const double na = std::sqrt(aa);
  const double nb = std::sqrt(bb);
  if (na < 1e-9 || nb < 1e-9) return 0.0;
  return ab / (na * nb);
}

double comm_term(int agent, std::span<const std::vector<double>> messages) {
  double r = 0.0;
  for (std::size_t j = 0; j < messages.size(); ++j) {
    if (static_cast<int>(j) == agent) continue;
    const double g = cosine_similarity(messages[agent], messages[j]);
    // Rounding can push |g| a hair above 1.
    r += std::max(0.0, 1.0 - g * g);
  }
  return r;
}

RewardTerms mask_terms(const RewardTerms& t, RewardPreset preset) {
  RewardTerms out;
  out.dist = t.dist;
  if (preset != RewardPreset::R1) out.goal = t.goal;
  if (preset == RewardPreset::R3 || preset == RewardPreset::R4) out.coll = t.coll;
  if (preset == RewardPreset::R4) out.comm = t.comm;
  return out;
}

double total_reward(const RewardTerms& terms, const RewardWeights& w, RewardPreset preset) {
  const RewardTerms m = mask_terms(terms, preset);
  return w.w_dist * m.dist + w.w_goal * m.goal + w.w_coll * m.coll + w.w_comm * m.comm;
}

}  // namespace hetsim
