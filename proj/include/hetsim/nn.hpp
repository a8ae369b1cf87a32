#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetsim/commgraph.hpp"

namespace hetsim {

class WeightsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;  // row-major

  std::size_t numel() const;
  bool operator==(const Tensor&) const = default;
};

// Architecture description stored next to the tensors.
struct NetworkMeta {
  int d_c = 16;
  int node_dim = 36;   // padded observation width + kind flag
  int edge_dim = EdgeFeature::kWidth;
  int embed_dim = 64;
  int gat_layers = 1;
  double negative_slope = 0.2;
  std::vector<int> head_hidden{256, 256};
  std::vector<int> phi_hidden{128, 128};
  std::vector<int> rho_hidden{256, 256};

  bool operator==(const NetworkMeta&) const = default;
};

struct WeightBundle {
  NetworkMeta meta;
  std::map<std::string, Tensor> tensors;

  // Every tensor the declared architecture needs, with its expected shape.
  std::map<std::string, std::vector<int>> required_shapes() const;
  // Throws WeightsError on a missing tensor or a shape/length mismatch.
  void validate() const;
  const Tensor& at(const std::string& name) const;

  bool operator==(const WeightBundle&) const = default;
};

// JSON document {"meta": {...}, "tensors": [{"name", "shape", "data"}]}.
// Unknown tensor names are reported through `warnings` and dropped.
WeightBundle parse_weights(const std::string& json_text,
                           std::vector<std::string>* warnings = nullptr);
WeightBundle load_weights(const std::string& path,
                          std::vector<std::string>* warnings = nullptr);
std::string dump_weights(const WeightBundle& bundle);
void save_weights(const WeightBundle& bundle, const std::string& path);

// Bundle with every required tensor filled from a seeded uniform(-scale, scale).
WeightBundle random_weights(const NetworkMeta& meta, std::uint64_t seed, double scale = 0.1);

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

struct Dense {
  int in = 0;
  int out = 0;
  std::vector<double> weight;  // [out, in]
  std::vector<double> bias;    // [out]

  std::vector<double> forward(std::span<const double> x) const;
};

// Hidden layers with ELU followed by a linear output layer.
struct Mlp {
  std::vector<Dense> layers;
  bool activate_last = false;

  std::vector<double> forward(std::span<const double> x) const;
};

Dense dense_from(const WeightBundle& b, const std::string& prefix);
Mlp mlp_from(const WeightBundle& b, const std::string& prefix, std::size_t n_layers,
             bool activate_last);

// Single-head GATv2 layer with edge features. Node i attends over its
// incoming neighbours and a self-loop (zero edge feature):
//   score_ij = att . LeakyReLU(W_dst h_i + b_dst + W_src h_j + b_src + W_edge e_ij)
//   out_i    = sum_j softmax_j(score_ij) (W_src h_j + b_src) + bias
struct GatV2Layer {
  Dense src;
  Dense dst;
  std::vector<double> w_edge;  // [out, edge_dim]
  int edge_dim = EdgeFeature::kWidth;
  std::vector<double> att;
  std::vector<double> bias;
  double negative_slope = 0.2;

  static GatV2Layer from(const WeightBundle& b, int layer);
};

// Attention weights of every node over [self, neighbours...] in that order.
struct Attention {
  std::vector<std::vector<int>> sources;
  std::vector<std::vector<double>> weights;
};

// Edge features are indexed like graph.edges; edge (i, j) is the message
// from j into i.
std::vector<std::vector<double>> gatv2_forward(
    const GatV2Layer& layer, const std::vector<std::vector<double>>& nodes,
    std::span<const EdgeFeature> edges, const CommGraph& graph,
    Attention* attention = nullptr);

// Zero-padded observation with a trailing kind flag (0 holonomic, 1 diff-drive).
std::vector<double> node_features(const Observation& obs, int node_dim);

struct PolicyOutput {
  Vec2 move;                // pre-clipping command
  std::vector<double> msg;  // d_c
};

// Splits a 2 + d_c head output into move and message.
PolicyOutput split_head_output(std::span<const double> out, int d_c);

// Runs an action head on an embedding; output width must be 2 + d_c.
PolicyOutput mlp_forward(const Mlp& head, std::span<const double> embedding, int d_c);

// Permutation-invariant critic V = rho(mean_i phi(o_i)).
class DeepSetsCritic {
 public:
  explicit DeepSetsCritic(const WeightBundle& bundle);
  double value(std::span<const std::vector<double>> node_inputs) const;

 private:
  Mlp phi_;
  Mlp rho_;
};

}  // namespace hetsim
