#include "hetsim/nn.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "hetsim/rng.hpp"
#include "json.hpp"

namespace hetsim {

using json = nlohmann::json;

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (int s : shape) n *= static_cast<std::size_t>(std::max(s, 0));
  return n;
}

namespace {

void add_mlp_shapes(std::map<std::string, std::vector<int>>& out, const std::string& prefix,
                    int in, const std::vector<int>& hidden, int out_dim) {
  int prev = in;
  std::size_t k = 0;
  for (; k < hidden.size(); ++k) {
    out[prefix + "." + std::to_string(k) + ".weight"] = {hidden[k], prev};
    out[prefix + "." + std::to_string(k) + ".bias"] = {hidden[k]};
    prev = hidden[k];
  }
  if (out_dim > 0) {
    out[prefix + "." + std::to_string(k) + ".weight"] = {out_dim, prev};
    out[prefix + "." + std::to_string(k) + ".bias"] = {out_dim};
  }
}

}  // namespace

std::map<std::string, std::vector<int>> WeightBundle::required_shapes() const {
  std::map<std::string, std::vector<int>> out;
  const NetworkMeta& m = meta;
  for (int l = 0; l < m.gat_layers; ++l) {
    const std::string p = "gat." + std::to_string(l) + ".";
    const int in = l == 0 ? m.node_dim : m.embed_dim;
    out[p + "W_src"] = {m.embed_dim, in};
    out[p + "b_src"] = {m.embed_dim};
    out[p + "W_dst"] = {m.embed_dim, in};
    out[p + "b_dst"] = {m.embed_dim};
    out[p + "W_edge"] = {m.embed_dim, m.edge_dim};
    out[p + "att"] = {m.embed_dim};
    out[p + "bias"] = {m.embed_dim};
  }
  const int head_in = m.gat_layers > 0 ? m.embed_dim : m.node_dim;
  add_mlp_shapes(out, "head.holonomic", head_in, m.head_hidden, 2 + m.d_c);
  add_mlp_shapes(out, "head.diff_drive", head_in, m.head_hidden, 2 + m.d_c);
  add_mlp_shapes(out, "critic.phi", m.node_dim, m.phi_hidden, 0);
  const int rho_in = m.phi_hidden.empty() ? m.node_dim : m.phi_hidden.back();
  add_mlp_shapes(out, "critic.rho", rho_in, m.rho_hidden, 1);
  return out;
}

void WeightBundle::validate() const {
  const NetworkMeta& m = meta;
  if (m.d_c < 1 || m.node_dim < 1 || m.edge_dim < 1 || m.embed_dim < 1 || m.gat_layers < 0)
    throw WeightsError("meta: dimensions must be positive");
  for (const auto& [name, t] : tensors) {
    if (t.numel() != t.data.size())
      throw WeightsError("tensor '" + name + "': data length " + std::to_string(t.data.size()) +
                         " does not match shape product " + std::to_string(t.numel()));
  }
  for (const auto& [name, shape] : required_shapes()) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw WeightsError("missing tensor '" + name + "'");
    if (it->second.shape != shape) {
      std::string want, got;
      for (int s : shape) want += std::to_string(s) + ",";
      for (int s : it->second.shape) got += std::to_string(s) + ",";
      throw WeightsError("tensor '" + name + "': expected shape [" + want + "] got [" + got +
                         "]");
    }
  }
}

const Tensor& WeightBundle::at(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw WeightsError("missing tensor '" + name + "'");
  return it->second;
}

WeightBundle parse_weights(const std::string& json_text, std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw WeightsError(std::string("malformed weights document: ") + e.what());
  }
  WeightBundle b;
  try {
    const json& meta = doc.at("meta");
    NetworkMeta& m = b.meta;
    m.d_c = meta.value("d_c", m.d_c);
    m.node_dim = meta.value("node_dim", m.node_dim);
    m.edge_dim = meta.value("edge_dim", m.edge_dim);
    m.embed_dim = meta.value("embed_dim", m.embed_dim);
    m.gat_layers = meta.value("gat_layers", m.gat_layers);
    m.negative_slope = meta.value("negative_slope", m.negative_slope);
    m.head_hidden = meta.value("head_hidden", m.head_hidden);
    m.phi_hidden = meta.value("phi_hidden", m.phi_hidden);
    m.rho_hidden = meta.value("rho_hidden", m.rho_hidden);

    const auto required = b.required_shapes();
    for (const json& entry : doc.at("tensors")) {
      const std::string name = entry.at("name").get<std::string>();
      Tensor t;
      t.shape = entry.at("shape").get<std::vector<int>>();
      t.data = entry.at("data").get<std::vector<double>>();
      if (t.numel() != t.data.size())
        throw WeightsError("tensor '" + name + "': data length " +
                           std::to_string(t.data.size()) + " does not match shape product " +
                           std::to_string(t.numel()));
      if (!required.contains(name)) {
        if (warnings) warnings->push_back("ignoring unknown tensor '" + name + "'");
        continue;
      }
      b.tensors[name] = std::move(t);
    }
  } catch (const json::exception& e) {
    throw WeightsError(std::string("malformed weights document: ") + e.what());
  }
  b.validate();
  return b;
}

WeightBundle load_weights(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw WeightsError("cannot open weights file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_weights(buf.str(), warnings);
}

std::string dump_weights(const WeightBundle& b) {
  json doc;
  const NetworkMeta& m = b.meta;
  doc["meta"] = {{"d_c", m.d_c},
                 {"node_dim", m.node_dim},
                 {"edge_dim", m.edge_dim},
                 {"embed_dim", m.embed_dim},
                 {"gat_layers", m.gat_layers},
                 {"negative_slope", m.negative_slope},
                 {"head_hidden", m.head_hidden},
                 {"phi_hidden", m.phi_hidden},
                 {"rho_hidden", m.rho_hidden}};
  json tensors = json::array();
  for (const auto& [name, t] : b.tensors)
    tensors.push_back({{"name", name}, {"shape", t.shape}, {"data", t.data}});
  doc["tensors"] = std::move(tensors);
  return doc.dump();
}

void save_weights(const WeightBundle& bundle, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw WeightsError("cannot write weights file '" + path + "'");
  out << dump_weights(bundle);
}

WeightBundle random_weights(const NetworkMeta& meta, std::uint64_t seed, double scale) {
  WeightBundle b;
  b.meta = meta;
  Rng rng(seed);
  for (const auto& [name, shape] : b.required_shapes()) {
    Tensor t;
    t.shape = shape;
    t.data.resize(t.numel());
    for (double& v : t.data) v = rng.uniform(-scale, scale);
    b.tensors[name] = std::move(t);
  }
  return b;
}

std::vector<double> Dense::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != in)
    throw WeightsError("dense layer expects width " + std::to_string(in) + ", got " +
                       std::to_string(x.size()));
  std::vector<double> y(bias);
  for (int o = 0; o < out; ++o) {
    const double* row = weight.data() + static_cast<std::size_t>(o) * in;
    double acc = 0.0;
    for (int i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] += acc;
  }
  return y;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  std::vector<double> h(x.begin(), x.end());
  for (std::size_t k = 0; k < layers.size(); ++k) {
    h = layers[k].forward(h);
    if (k + 1 < layers.size() || activate_last)
      for (double& v : h) v = elu(v);
  }
  return h;
}

Dense dense_from(const WeightBundle& b, const std::string& prefix) {
  const Tensor& w = b.at(prefix + ".weight");
  const Tensor& bias = b.at(prefix + ".bias");
  if (w.shape.size() != 2 || bias.shape.size() != 1 || bias.shape[0] != w.shape[0])
    throw WeightsError("layer '" + prefix + "': inconsistent weight/bias shapes");
  return {w.shape[1], w.shape[0], w.data, bias.data};
}

Mlp mlp_from(const WeightBundle& b, const std::string& prefix, std::size_t n_layers,
             bool activate_last) {
  Mlp m;
  m.activate_last = activate_last;
  for (std::size_t k = 0; k < n_layers; ++k)
    m.layers.push_back(dense_from(b, prefix + "." + std::to_string(k)));
  for (std::size_t k = 1; k < m.layers.size(); ++k)
    if (m.layers[k].in != m.layers[k - 1].out)
      throw WeightsError("mlp '" + prefix + "': layer widths do not chain");
  return m;
}

GatV2Layer GatV2Layer::from(const WeightBundle& b, int layer) {
  const std::string p = "gat." + std::to_string(layer) + ".";
  auto dense = [&](const std::string& w, const std::string& bias) {
    const Tensor& tw = b.at(p + w);
    const Tensor& tb = b.at(p + bias);
    return Dense{tw.shape[1], tw.shape[0], tw.data, tb.data};
  };
  GatV2Layer g;
  g.src = dense("W_src", "b_src");
  g.dst = dense("W_dst", "b_dst");
  const Tensor& we = b.at(p + "W_edge");
  g.w_edge = we.data;
  g.edge_dim = we.shape[1];
  g.att = b.at(p + "att").data;
  g.bias = b.at(p + "bias").data;
  g.negative_slope = b.meta.negative_slope;
  if (g.src.out != g.dst.out || we.shape[0] != g.src.out ||
      static_cast<int>(g.att.size()) != g.src.out || static_cast<int>(g.bias.size()) != g.src.out)
    throw WeightsError("gat layer " + std::to_string(layer) + ": inconsistent widths");
  return g;
}

std::vector<std::vector<double>> gatv2_forward(const GatV2Layer& layer,
                                               const std::vector<std::vector<double>>& nodes,
                                               std::span<const EdgeFeature> edges,
                                               const CommGraph& graph, Attention* attention) {
  const int n = static_cast<int>(nodes.size());
  if (n != graph.num_nodes) throw WeightsError("gatv2: node count does not match graph");
  if (edges.size() != graph.edges.size())
    throw WeightsError("gatv2: edge feature count does not match graph");
  if (layer.edge_dim != EdgeFeature::kWidth)
    throw WeightsError("gatv2: edge_dim must be " + std::to_string(EdgeFeature::kWidth));
  const int width = layer.src.out;

  std::vector<std::vector<double>> x_src(n), x_dst(n);
  for (int i = 0; i < n; ++i) {
    x_src[i] = layer.src.forward(nodes[i]);
    x_dst[i] = layer.dst.forward(nodes[i]);
  }

  // Incoming sources per node: self first, then neighbours in edge order.
  std::vector<std::vector<int>> sources(n);
  std::vector<std::vector<const EdgeFeature*>> feats(n);
  for (int i = 0; i < n; ++i) {
    sources[i].push_back(i);
    feats[i].push_back(nullptr);
  }
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto [i, j] = graph.edges[e];
    sources[i].push_back(j);
    feats[i].push_back(&edges[e]);
  }

  std::vector<std::vector<double>> out(n, std::vector<double>(width, 0.0));
  if (attention) {
    attention->sources = sources;
    attention->weights.assign(n, {});
  }
  std::vector<double> scores;
  for (int i = 0; i < n; ++i) {
    scores.assign(sources[i].size(), 0.0);
    for (std::size_t s = 0; s < sources[i].size(); ++s) {
      const int j = sources[i][s];
      double ef[EdgeFeature::kWidth] = {0, 0, 0, 0, 0};
      if (const EdgeFeature* f = feats[i][s]) {
        ef[0] = f->rel_pos.x;
        ef[1] = f->rel_pos.y;
        ef[2] = f->dist;
        ef[3] = f->rel_vel.x;
        ef[4] = f->rel_vel.y;
      }
      double score = 0.0;
      for (int c = 0; c < width; ++c) {
        double z = x_dst[i][c] + x_src[j][c];
        const double* we = layer.w_edge.data() + static_cast<std::size_t>(c) * layer.edge_dim;
        for (int k = 0; k < layer.edge_dim; ++k) z += we[k] * ef[k];
        if (z < 0.0) z *= layer.negative_slope;
        score += layer.att[c] * z;
      }
      scores[s] = score;
    }
    const double top = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    for (double& s : scores) {
      s = std::exp(s - top);
      total += s;
    }
    for (double& s : scores) s /= total;
    for (std::size_t s = 0; s < sources[i].size(); ++s) {
      const int j = sources[i][s];
      for (int c = 0; c < width; ++c) out[i][c] += scores[s] * x_src[j][c];
    }
    for (int c = 0; c < width; ++c) out[i][c] += layer.bias[c];
    if (attention) attention->weights[i] = scores;
  }
  return out;
}

std::vector<double> node_features(const Observation& obs, int node_dim) {
  std::vector<double> flat = obs.flatten();
  if (static_cast<int>(flat.size()) + 1 > node_dim)
    throw WeightsError("observation width " + std::to_string(flat.size()) +
                       " does not fit node_dim " + std::to_string(node_dim));
  flat.resize(node_dim, 0.0);
  flat.back() = obs.kind == AgentKind::DiffDrive ? 1.0 : 0.0;
  return flat;
}

PolicyOutput split_head_output(std::span<const double> out, int d_c) {
  if (static_cast<int>(out.size()) != 2 + d_c)
    throw WeightsError("head output width " + std::to_string(out.size()) + ", expected " +
                       std::to_string(2 + d_c));
  PolicyOutput p;
  p.move = {out[0], out[1]};
  p.msg.assign(out.begin() + 2, out.end());
  return p;
}

PolicyOutput mlp_forward(const Mlp& head, std::span<const double> embedding, int d_c) {
  return split_head_output(head.forward(embedding), d_c);
}

DeepSetsCritic::DeepSetsCritic(const WeightBundle& bundle)
    : phi_(mlp_from(bundle, "critic.phi", bundle.meta.phi_hidden.size(), true)),
      rho_(mlp_from(bundle, "critic.rho", bundle.meta.rho_hidden.size() + 1, false)) {}

double DeepSetsCritic::value(std::span<const std::vector<double>> node_inputs) const {
  if (node_inputs.empty()) throw WeightsError("critic needs at least one observation");
  std::vector<double> pooled;
  for (const auto& o : node_inputs) {
    const std::vector<double> e = phi_.forward(o);
    if (pooled.empty()) pooled.assign(e.size(), 0.0);
    for (std::size_t k = 0; k < e.size(); ++k) pooled[k] += e[k];
  }
  const double inv = 1.0 / static_cast<double>(node_inputs.size());
  for (double& v : pooled) v *= inv;
  return rho_.forward(pooled).at(0);
}

}  // namespace hetsim
