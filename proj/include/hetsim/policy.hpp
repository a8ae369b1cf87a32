#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hetsim/commgraph.hpp"
#include "hetsim/nn.hpp"
#include "hetsim/rng.hpp"
#include "hetsim/world.hpp"

namespace hetsim {

// Everything a policy may look at when choosing the team's actions.
struct PolicyContext {
  const EpisodeState& state;
  const WorldConfig& config;
  std::span<const Observation> observations;
  const CommGraph& graph;
};

// Policies are immutable once built and may be shared across threads; any
// randomness comes from the per-episode generator passed to act().
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::vector<PolicyOutput> act(const PolicyContext& ctx, Rng& rng) const = 0;
  virtual std::string name() const = 0;
};

// Steers toward the closest target seen beyond the coverage radius (those
// inside it are already covered by this agent), otherwise wanders. Holonomic
// agents track a 1 m/s cruise velocity rather than accelerating without bound.
// Messages are the unit basis vector e_(index mod d_c).
PolicyOutput greedy_policy(const Observation& obs, int agent_index,
                           const WorldConfig& config, Rng& rng);

class GreedyPolicy final : public Policy {
 public:
  std::vector<PolicyOutput> act(const PolicyContext& ctx, Rng& rng) const override;
  std::string name() const override { return "greedy"; }
};

// Uniform commands in [-u_max, u_max] and messages in [-1, 1].
class RandomPolicy final : public Policy {
 public:
  std::vector<PolicyOutput> act(const PolicyContext& ctx, Rng& rng) const override;
  std::string name() const override { return "random"; }
};

// GATv2 encoder followed by per-kind MLP heads. Move outputs are squashed
// with tanh and scaled by u_max; messages are squashed to [-1, 1].
class NeuralPolicy final : public Policy {
 public:
  explicit NeuralPolicy(WeightBundle bundle);

  std::vector<PolicyOutput> act(const PolicyContext& ctx, Rng& rng) const override;
  std::string name() const override { return "weights"; }

  // Raw head outputs (before squashing) for every agent.
  std::vector<PolicyOutput> forward(const PolicyContext& ctx) const;
  std::vector<std::vector<double>> embed(const PolicyContext& ctx,
                                         Attention* attention = nullptr) const;
  double value(std::span<const Observation> observations) const;

  const WeightBundle& bundle() const { return bundle_; }

 private:
  WeightBundle bundle_;
  std::vector<GatV2Layer> gat_;
  Mlp head_holonomic_;
  Mlp head_diff_drive_;
  DeepSetsCritic critic_;
};

// "greedy", "random" or "weights:<path>".
std::unique_ptr<Policy> make_policy(const std::string& selector);

}  // namespace hetsim
