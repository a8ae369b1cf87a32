#include "hetsim/commgraph.hpp"

#include <algorithm>

namespace hetsim {

bool CommGraph::has_edge(int i, int j) const {
  return std::binary_search(edges.begin(), edges.end(), std::pair{i, j});
}

std::vector<int> CommGraph::neighbors(int i) const {
  std::vector<int> out;
  auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{i, -1});
  for (; it != edges.end() && it->first == i; ++it) out.push_back(it->second);
  return out;
}

CommGraph build_graph(std::span<const AgentState> agents, double r_c) {
  CommGraph g;
  g.num_nodes = static_cast<int>(agents.size());
  for (int i = 0; i < g.num_nodes; ++i) {
    for (int j = 0; j < g.num_nodes; ++j) {
      if (i == j) continue;
      // distance() is symmetric in its arguments, so the edge set is too.
      if (distance(agents[i].pos, agents[j].pos) <= r_c) g.edges.emplace_back(i, j);
    }
  }
  return g;
}

EdgeFeature edge_feature(const AgentState& a, const AgentState& b) {
  EdgeFeature f;
  f.rel_pos = a.pos - b.pos;
  f.dist = norm(f.rel_pos);
  f.rel_vel = a.world_velocity() - b.world_velocity();
  return f;
}

std::vector<EdgeFeature> edge_features(const CommGraph& graph,
                                       std::span<const AgentState> agents) {
  std::vector<EdgeFeature> out;
  out.reserve(graph.edges.size());
  for (const auto& [i, j] : graph.edges) out.push_back(edge_feature(agents[i], agents[j]));
  return out;
}

std::vector<double> Observation::flatten() const {
  std::vector<double> out;
  out.reserve(width());
  out.insert(out.end(), scan.readings.begin(), scan.readings.end());
  out.insert(out.end(), msg.begin(), msg.end());
  if (kind == AgentKind::Holonomic) {
    out.push_back(vel.x);
    out.push_back(vel.y);
  } else {
    out.push_back(speed);
    out.push_back(heading);
    out.push_back(omega);
  }
  return out;
}

std::size_t Observation::width() const {
  return scan.readings.size() + msg.size() + (kind == AgentKind::Holonomic ? 2 : 3);
}

std::vector<double> aggregate_messages(int agent, const CommGraph& graph,
                                       std::span<const std::vector<double>> messages,
                                       int d_c) {
  std::vector<double> out(d_c, 0.0);
  const auto nbrs = graph.neighbors(agent);
  if (nbrs.empty()) return out;
  for (int j : nbrs)
    for (int k = 0; k < d_c; ++k) out[k] += messages[j][k];
  const double inv = 1.0 / static_cast<double>(nbrs.size());
  for (double& v : out) v *= inv;
  return out;
}

Observation assemble_observation(int agent, RangeScan scan, const CommGraph& graph,
                                 std::span<const std::vector<double>> prev_messages,
                                 const AgentState& state, int d_c) {
  Observation obs;
  obs.kind = state.kind;
  obs.scan = std::move(scan);
  obs.msg = aggregate_messages(agent, graph, prev_messages, d_c);
  obs.vel = state.vel;
  obs.speed = state.speed;
  obs.heading = state.heading;
  obs.omega = state.omega;
  return obs;
}

std::vector<Observation> observe_all(const EpisodeState& state, const WorldConfig& config,
                                     CommGraph* graph_out) {
  CommGraph graph = build_graph(state.agents, config);
  std::vector<Observation> out;
  out.reserve(state.agents.size());
  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    out.push_back(assemble_observation(static_cast<int>(i),
                                       ray_cast(state.agents[i], state.targets, config),
                                       graph, state.prev_messages, state.agents[i],
                                       config.d_c));
  }
  if (graph_out) *graph_out = std::move(graph);
  return out;
}

}  // namespace hetsim
