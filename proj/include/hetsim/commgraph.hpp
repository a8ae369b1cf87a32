#pragma once

#include <span>
#include <utility>
#include <vector>

#include "hetsim/sensing.hpp"
#include "hetsim/world.hpp"

namespace hetsim {

// Directed edge list over agent indices; symmetric by construction.
struct CommGraph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;  // (i, j), i != j, sorted

  bool has_edge(int i, int j) const;
  // Neighbours j with (i, j) in the edge set, ascending.
  std::vector<int> neighbors(int i) const;
};

// Edge (i, j) exists iff |p_i - p_j| <= r_c.
CommGraph build_graph(std::span<const AgentState> agents, double r_c);
inline CommGraph build_graph(std::span<const AgentState> agents, const WorldConfig& config) {
  return build_graph(agents, config.r_c);
}

struct EdgeFeature {
  Vec2 rel_pos;  // p_i - p_j
  double dist = 0.0;
  Vec2 rel_vel;  // v_i - v_j, world frame

  static constexpr int kWidth = 5;
};

EdgeFeature edge_feature(const AgentState& a, const AgentState& b);
// One feature per entry of graph.edges, same order.
std::vector<EdgeFeature> edge_features(const CommGraph& graph,
                                       std::span<const AgentState> agents);

struct Observation {
  AgentKind kind = AgentKind::Holonomic;
  RangeScan scan;
  std::vector<double> msg;
  Vec2 vel;             // holonomic
  double speed = 0.0;   // diff-drive
  double heading = 0.0;
  double omega = 0.0;

  // [scan, msg, vx, vy] or [scan, msg, v, theta, omega].
  std::vector<double> flatten() const;
  std::size_t width() const;
};

inline int observation_width(AgentKind kind, const WorldConfig& config) {
  return config.n_l + config.d_c + (kind == AgentKind::Holonomic ? 2 : 3);
}

// Component-wise mean of the neighbours' previous-step messages; zeros when
// the agent has no neighbour.
std::vector<double> aggregate_messages(int agent, const CommGraph& graph,
                                       std::span<const std::vector<double>> messages,
                                       int d_c);

Observation assemble_observation(int agent, RangeScan scan,
                                 const CommGraph& graph,
                                 std::span<const std::vector<double>> prev_messages,
                                 const AgentState& state, int d_c);

// Scans every agent, builds the graph and assembles all observations.
std::vector<Observation> observe_all(const EpisodeState& state, const WorldConfig& config,
                                     CommGraph* graph_out = nullptr);

}  // namespace hetsim
