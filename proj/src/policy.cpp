#include "hetsim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>

#include "hetsim/sensing.hpp"

namespace hetsim {

namespace {

constexpr double kWanderJitter = 0.6;  // rad
constexpr double kCruiseSpeed = 1.0;   // m/s, holonomic velocity set point

std::vector<double> basis_message(int agent_index, int d_c) {
  std::vector<double> msg(d_c, 0.0);
  msg[agent_index % d_c] = 1.0;
  return msg;
}

}  // namespace

PolicyOutput greedy_policy(const Observation& obs, int agent_index, const WorldConfig& config,
                           Rng& rng) {
  PolicyOutput out;
  out.msg = basis_message(agent_index, config.d_c);

  const double max_range = sensor_range(obs.kind, config);
  const double covered_reading = config.rho_cov - config.target_radius;
  const int n = static_cast<int>(obs.scan.readings.size());
  int best = -1;
  for (int k = 0; k < n; ++k) {
    const double r = obs.scan.readings[k];
    if (r >= max_range || r <= covered_reading) continue;
    if (best < 0 || r < obs.scan.readings[best]) best = k;
  }

  if (obs.kind == AgentKind::Holonomic) {
    double heading;
    if (best >= 0) {
      heading = ray_angle(best, n, 0.0);
    } else if (norm(obs.vel) > 1e-6) {
      heading = std::atan2(obs.vel.y, obs.vel.x) + rng.uniform(-kWanderJitter, kWanderJitter);
    } else {
      heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
    }
    // Track a cruise velocity instead of pushing at full force forever, so the
    // agent stays slow enough to brake within the filter's margin.
    const Vec2 desired = unit_from_angle(heading) * kCruiseSpeed;
    const double gain = config.m_mass / config.dt;
    Vec2 force = (desired - obs.vel) * gain + obs.vel * (config.c_d * config.m_mass);
    // Uniform scaling keeps the steering direction under the per-axis bound.
    const double peak = std::max(std::abs(force.x), std::abs(force.y));
    if (peak > config.u_max) force = force * (config.u_max / peak);
    out.move = force;
    return out;
  }

  if (best >= 0) {
    // Ray angles are relative to the heading for diff-drive scans.
    const double bearing = wrap_angle(ray_angle(best, n, 0.0));
    out.move = {config.u_max * std::max(0.2, std::cos(bearing)),
                std::clamp(bearing, -config.u_max, config.u_max)};
  } else {
    out.move = {config.u_max, rng.uniform(-config.u_max, config.u_max)};
  }
  return out;
}

std::vector<PolicyOutput> GreedyPolicy::act(const PolicyContext& ctx, Rng& rng) const {
  std::vector<PolicyOutput> out;
  out.reserve(ctx.observations.size());
  for (std::size_t i = 0; i < ctx.observations.size(); ++i)
    out.push_back(greedy_policy(ctx.observations[i], static_cast<int>(i), ctx.config, rng));
  return out;
}

std::vector<PolicyOutput> RandomPolicy::act(const PolicyContext& ctx, Rng& rng) const {
  std::vector<PolicyOutput> out(ctx.observations.size());
  const double u = ctx.config.u_max;
  for (auto& p : out) {
    p.move.x = rng.uniform(-u, u);
    p.move.y = rng.uniform(-u, u);
    p.msg.resize(ctx.config.d_c);
    for (double& m : p.msg) m = rng.uniform(-1.0, 1.0);
  }
  return out;
}

NeuralPolicy::NeuralPolicy(WeightBundle bundle)
    : bundle_((bundle.validate(), std::move(bundle))),
      head_holonomic_(mlp_from(bundle_, "head.holonomic", bundle_.meta.head_hidden.size() + 1,
                               false)),
      head_diff_drive_(mlp_from(bundle_, "head.diff_drive",
                                bundle_.meta.head_hidden.size() + 1, false)),
      critic_(bundle_) {
  for (int l = 0; l < bundle_.meta.gat_layers; ++l) gat_.push_back(GatV2Layer::from(bundle_, l));
}

std::vector<std::vector<double>> NeuralPolicy::embed(const PolicyContext& ctx,
                                                     Attention* attention) const {
  if (ctx.config.d_c != bundle_.meta.d_c)
    throw WeightsError("weights were built for d_c = " + std::to_string(bundle_.meta.d_c) +
                       ", scenario uses " + std::to_string(ctx.config.d_c));
  std::vector<std::vector<double>> h;
  h.reserve(ctx.observations.size());
  for (const Observation& o : ctx.observations)
    h.push_back(node_features(o, bundle_.meta.node_dim));
  const std::vector<EdgeFeature> edges = edge_features(ctx.graph, ctx.state.agents);
  for (std::size_t l = 0; l < gat_.size(); ++l) {
    h = gatv2_forward(gat_[l], h, edges, ctx.graph, l + 1 == gat_.size() ? attention : nullptr);
    for (auto& row : h)
      for (double& v : row) v = elu(v);
  }
  return h;
}

std::vector<PolicyOutput> NeuralPolicy::forward(const PolicyContext& ctx) const {
  const auto h = embed(ctx);
  std::vector<PolicyOutput> out;
  out.reserve(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Mlp& head = ctx.observations[i].kind == AgentKind::Holonomic ? head_holonomic_
                                                                      : head_diff_drive_;
    out.push_back(mlp_forward(head, h[i], bundle_.meta.d_c));
  }
  return out;
}

std::vector<PolicyOutput> NeuralPolicy::act(const PolicyContext& ctx, Rng&) const {
  std::vector<PolicyOutput> out = forward(ctx);
  for (auto& p : out) {
    p.move = {std::tanh(p.move.x) * ctx.config.u_max, std::tanh(p.move.y) * ctx.config.u_max};
    for (double& m : p.msg) m = std::tanh(m);
  }
  return out;
}

double NeuralPolicy::value(std::span<const Observation> observations) const {
  std::vector<std::vector<double>> inputs;
  inputs.reserve(observations.size());
  for (const Observation& o : observations) inputs.push_back(node_features(o, bundle_.meta.node_dim));
  return critic_.value(inputs);
}

std::unique_ptr<Policy> make_policy(const std::string& selector) {
  if (selector == "greedy") return std::make_unique<GreedyPolicy>();
  if (selector == "random") return std::make_unique<RandomPolicy>();
  constexpr std::string_view kPrefix = "weights:";
  if (selector.starts_with(kPrefix)) {
    std::vector<std::string> warnings;
    WeightBundle bundle = load_weights(selector.substr(kPrefix.size()), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return std::make_unique<NeuralPolicy>(std::move(bundle));
  }
  throw std::invalid_argument("unknown policy '" + selector +
                              "' (expected greedy, random or weights:<path>)");
}

}  // namespace hetsim
