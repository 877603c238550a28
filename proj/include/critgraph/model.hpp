#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "critgraph/graph.hpp"
#include "critgraph/metrics.hpp"
#include "critgraph/oracle.hpp"
#include "critgraph/rng.hpp"

// The inductive ranker: per-node feature initialization, stacked
// attention-weighted neighborhood aggregation with a two-layer skip
// concatenation, and a small feedforward regression head that turns an
// embedding (node, or Hadamard product of two nodes for links) into an
// unconstrained ranking score.

namespace critgraph {

struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;  // row-major

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

  bool operator==(const Mat&) const = default;
};

inline std::vector<double> matvec(const Mat& m, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != m.cols)
    throw std::invalid_argument("matvec: shape mismatch (" + std::to_string(m.rows) + "x" +
                                std::to_string(m.cols) + " vs length " +
                                std::to_string(x.size()) + ")");
  std::vector<double> y(static_cast<std::size_t>(m.rows), 0.0);
  for (int r = 0; r < m.rows; ++r) {
    const double* row = &m.a[static_cast<std::size_t>(r) * m.cols];
    double s = 0.0;
    for (int c = 0; c < m.cols; ++c) s += row[c] * x[static_cast<std::size_t>(c)];
    y[static_cast<std::size_t>(r)] = s;
  }
  return y;
}

enum class DegreeFeature { normalized, raw };

struct GnnHyperparams {
  std::vector<int> embedding_dims = {64, 32, 16};
  std::vector<int> regression_dims = {12, 8, 1};
  int input_feature_dim = 8;
  int neighbor_sample_cap = 25;
  DegreeFeature degree_feature = DegreeFeature::normalized;
  ElementKind kind = ElementKind::node;

  bool operator==(const GnnHyperparams&) const = default;

  void validate() const {
    if (embedding_dims.empty() || regression_dims.empty())
      throw std::invalid_argument("hyperparams: layer dim lists must be non-empty");
    for (int d : embedding_dims)
      if (d < 1) throw std::invalid_argument("hyperparams: embedding dims must be >= 1");
    for (int d : regression_dims)
      if (d < 1) throw std::invalid_argument("hyperparams: regression dims must be >= 1");
    if (regression_dims.back() != 1)
      throw std::invalid_argument("hyperparams: final regression dim must be 1");
    if (input_feature_dim < 2)
      throw std::invalid_argument("hyperparams: input_feature_dim must be >= 2");
    if (neighbor_sample_cap < 1)
      throw std::invalid_argument("hyperparams: neighbor_sample_cap must be >= 1");
  }

  // Dim of the self embedding entering layer l (0-based).
  int layer_in(int l) const {
    return l == 0 ? input_feature_dim : embedding_dims[static_cast<std::size_t>(l) - 1];
  }
  // Dim of the skip embedding (two layers back; the input features repeat
  // for the first layer).
  int layer_skip(int l) const {
    return l <= 1 ? input_feature_dim : embedding_dims[static_cast<std::size_t>(l) - 2];
  }
  int layer_out(int l) const { return embedding_dims[static_cast<std::size_t>(l)]; }
  int layer_count() const { return static_cast<int>(embedding_dims.size()); }
  int embedding_dim() const { return embedding_dims.back(); }
};

struct GnnLayer {
  Mat aggregate;                  // Q^l: layer_out x layer_in
  std::vector<double> attention;  // a^l: 2 * layer_out
  Mat combine;                    // W^l: layer_out x (layer_in + layer_skip + layer_out)

  bool operator==(const GnnLayer&) const = default;
};

struct GnnModel {
  GnnHyperparams hyper;
  Metric metric = Metric::egr;
  std::string family_tag;
  std::vector<GnnLayer> layers;
  std::vector<Mat> reg_weights;
  std::vector<std::vector<double>> reg_bias;
  // provenance, carried through serialization
  std::uint64_t training_seed = 0;
  std::string corpus_digest;

  bool operator==(const GnnModel&) const = default;
};

/// Iterate every parameter tensor in a fixed order. fn(name, shape, data,
/// len) — the one enumeration serialization, the optimizer, and the
/// finite-difference harness all share.
template <class ModelT, class F>
void visit_tensors(ModelT& model, F&& fn) {
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto& layer = model.layers[l];
    const std::string prefix = "layer" + std::to_string(l);
    fn(prefix + ".aggregate", std::vector<int>{layer.aggregate.rows, layer.aggregate.cols},
       layer.aggregate.a.data(), layer.aggregate.a.size());
    fn(prefix + ".attention", std::vector<int>{static_cast<int>(layer.attention.size())},
       layer.attention.data(), layer.attention.size());
    fn(prefix + ".combine", std::vector<int>{layer.combine.rows, layer.combine.cols},
       layer.combine.a.data(), layer.combine.a.size());
  }
  for (std::size_t r = 0; r < model.reg_weights.size(); ++r) {
    const std::string prefix = "regression" + std::to_string(r);
    fn(prefix + ".weight",
       std::vector<int>{model.reg_weights[r].rows, model.reg_weights[r].cols},
       model.reg_weights[r].a.data(), model.reg_weights[r].a.size());
    fn(prefix + ".bias", std::vector<int>{static_cast<int>(model.reg_bias[r].size())},
       model.reg_bias[r].data(), model.reg_bias[r].size());
  }
}

/// Model with the right shapes and all parameters zero.
inline GnnModel zero_model(const GnnHyperparams& hyper, Metric metric = Metric::egr,
                           std::string family_tag = {}) {
  hyper.validate();
  GnnModel m;
  m.hyper = hyper;
  m.metric = metric;
  m.family_tag = std::move(family_tag);
  for (int l = 0; l < hyper.layer_count(); ++l) {
    GnnLayer layer;
    layer.aggregate = Mat(hyper.layer_out(l), hyper.layer_in(l));
    layer.attention.assign(static_cast<std::size_t>(2 * hyper.layer_out(l)), 0.0);
    layer.combine =
        Mat(hyper.layer_out(l), hyper.layer_in(l) + hyper.layer_skip(l) + hyper.layer_out(l));
    m.layers.push_back(std::move(layer));
  }
  int in = hyper.embedding_dim();
  for (int d : hyper.regression_dims) {
    m.reg_weights.emplace_back(d, in);
    m.reg_bias.emplace_back(static_cast<std::size_t>(d), 0.0);
    in = d;
  }
  return m;
}

/// Glorot-uniform initialization, deterministic under seed.
inline GnnModel init_model(const GnnHyperparams& hyper, Metric metric, std::string family_tag,
                           std::uint64_t seed) {
  GnnModel m = zero_model(hyper, metric, std::move(family_tag));
  std::uint64_t tensor_index = 0;
  visit_tensors(m, [&](const std::string&, const std::vector<int>& shape, double* data,
                       std::size_t len) {
    Rng rng(derive_seed(seed, 0xb007, tensor_index++));
    const int fan_out = shape[0];
    const int fan_in = shape.size() > 1 ? shape[1] : fan_out;
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < len; ++i) data[i] = rand_range(rng, -limit, limit);
  });
  // Small positive bias keeps freshly-initialized relu units (and the
  // finite-difference harness) off the exact kink at 0.
  for (auto& b : m.reg_bias) std::fill(b.begin(), b.end(), 0.01);
  return m;
}

/// X_v = [degree statistic, 1, 1, ..., 1]. The default statistic is
/// degree / max_degree so hub magnitudes do not swamp transfer across graph
/// sizes; the raw degree remains selectable.
inline std::vector<std::vector<double>> init_features(const Graph& g, int dim,
                                                      DegreeFeature mode = DegreeFeature::normalized) {
  if (dim < 2) throw std::invalid_argument("init_features: dim must be >= 2");
  const int max_deg = g.max_degree();
  std::vector<std::vector<double>> x(static_cast<std::size_t>(g.node_count()),
                                     std::vector<double>(static_cast<std::size_t>(dim), 1.0));
  for (NodeId v = 0; v < g.node_count(); ++v) {
    double d = g.degree(v);
    if (mode == DegreeFeature::normalized) d = max_deg > 0 ? d / max_deg : 0.0;
    x[static_cast<std::size_t>(v)][0] = d;
  }
  return x;
}

/// 1-hop neighborhood of v, capped: when the neighbor list exceeds cap, a
/// uniform subset of size cap is drawn, deterministically from
/// (seed, v, layer). Multi-hop receptive fields come from layer stacking.
inline std::vector<NodeId> neighborhood(const Graph& g, NodeId v, int cap, std::uint64_t seed,
                                        int layer) {
  const auto& all = g.neighbors(v);
  if (static_cast<int>(all.size()) <= cap) return all;
  std::vector<NodeId> pool = all;
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(layer)));
  for (int i = 0; i < cap; ++i) {
    const auto j = i + static_cast<int>(rand_below(rng, pool.size() - static_cast<std::size_t>(i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(cap));
  std::sort(pool.begin(), pool.end());
  return pool;
}

inline double leaky_relu(double x) { return x > 0.0 ? x : 0.2 * x; }
inline double leaky_relu_grad(double x) { return x > 0.0 ? 1.0 : 0.2; }
inline double relu(double x) { return x > 0.0 ? x : 0.0; }
// Subgradient at 0 fixed to 0.
inline double relu_grad(double x) { return x > 0.0 ? 1.0 : 0.0; }

/// Attention-weighted neighborhood pooling: softmax over
/// leaky_relu(a . [Q h_self || Q h_k]) weights the transformed neighbor
/// embeddings. Empty neighborhoods pool to the zero vector.
inline std::vector<double> aggregate_neighbors(const Mat& Q, const std::vector<double>& attention,
                                               const std::vector<double>& self_prev,
                                               const std::vector<std::vector<double>>& neighbor_prev) {
  const int q = Q.rows;
  if (static_cast<int>(attention.size()) != 2 * q)
    throw std::invalid_argument("aggregate: attention vector must have twice the output dim");
  std::vector<double> pooled(static_cast<std::size_t>(q), 0.0);
  if (neighbor_prev.empty()) return pooled;
  const std::vector<double> m_self = matvec(Q, self_prev);
  double self_logit = 0.0;
  for (int i = 0; i < q; ++i) self_logit += attention[static_cast<std::size_t>(i)] * m_self[static_cast<std::size_t>(i)];
  std::vector<std::vector<double>> m(neighbor_prev.size());
  std::vector<double> logits(neighbor_prev.size());
  for (std::size_t k = 0; k < neighbor_prev.size(); ++k) {
    m[k] = matvec(Q, neighbor_prev[k]);
    double t = self_logit;
    for (int i = 0; i < q; ++i) t += attention[static_cast<std::size_t>(q + i)] * m[k][static_cast<std::size_t>(i)];
    logits[k] = leaky_relu(t);
  }
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  std::vector<double> alpha(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) {
    alpha[k] = std::exp(logits[k] - max_logit);
    denom += alpha[k];
  }
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double w = alpha[k] / denom;
    for (int i = 0; i < q; ++i) pooled[static_cast<std::size_t>(i)] += w * m[k][static_cast<std::size_t>(i)];
  }
  return pooled;
}

/// relu(W [h_prev || h_skip || h_nbr]).
inline std::vector<double> combine(const Mat& W, const std::vector<double>& h_prev,
                                   const std::vector<double>& h_skip,
                                   const std::vector<double>& h_nbr) {
  if (static_cast<int>(h_prev.size() + h_skip.size() + h_nbr.size()) != W.cols)
    throw std::invalid_argument("combine: concatenated input does not match weight shape");
  std::vector<double> u;
  u.reserve(static_cast<std::size_t>(W.cols));
  u.insert(u.end(), h_prev.begin(), h_prev.end());
  u.insert(u.end(), h_skip.begin(), h_skip.end());
  u.insert(u.end(), h_nbr.begin(), h_nbr.end());
  std::vector<double> out = matvec(W, u);
  for (double& x : out) x = relu(x);
  return out;
}

/// Synchronous L-layer embedding of every node: layer l consumes only layer
/// l-1 (and l-2 skip) values. Returns z_v = h_v^L.
inline std::vector<std::vector<double>> embed_all(const Graph& g, const GnnModel& model,
                                                  std::uint64_t seed) {
  model.hyper.validate();
  std::vector<std::vector<double>> h_prev =
      init_features(g, model.hyper.input_feature_dim, model.hyper.degree_feature);
  std::vector<std::vector<double>> h_skip = h_prev;  // h^{l-2}, = h^0 for layer 1
  const int n = g.node_count();
  for (int l = 0; l < model.hyper.layer_count(); ++l) {
    const GnnLayer& layer = model.layers[static_cast<std::size_t>(l)];
    std::vector<std::vector<double>> h_next(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) {
      const std::vector<NodeId> nbrs =
          neighborhood(g, v, model.hyper.neighbor_sample_cap, seed, l);
      std::vector<std::vector<double>> nbr_prev;
      nbr_prev.reserve(nbrs.size());
      for (NodeId k : nbrs) nbr_prev.push_back(h_prev[static_cast<std::size_t>(k)]);
      const std::vector<double> pooled = aggregate_neighbors(
          layer.aggregate, layer.attention, h_prev[static_cast<std::size_t>(v)], nbr_prev);
      h_next[static_cast<std::size_t>(v)] =
          combine(layer.combine, h_prev[static_cast<std::size_t>(v)],
                  h_skip[static_cast<std::size_t>(v)], pooled);
    }
    h_skip = std::move(h_prev);
    h_prev = std::move(h_next);
  }
  return h_prev;
}

/// Regression head: relu feedforward layers, final layer affine (scores are
/// unconstrained reals used only for ranking).
inline double node_score(const std::vector<double>& embedding, const GnnModel& model) {
  std::vector<double> x = embedding;
  const std::size_t last = model.reg_weights.size() - 1;
  for (std::size_t r = 0; r < model.reg_weights.size(); ++r) {
    std::vector<double> y = matvec(model.reg_weights[r], x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += model.reg_bias[r][i];
    if (r != last)
      for (double& v : y) v = relu(v);
    x = std::move(y);
  }
  return x.at(0);
}

/// Link score: regression head applied to the Hadamard product of the two
/// endpoint embeddings (symmetric by construction).
inline double link_score(const std::vector<double>& z_u, const std::vector<double>& z_v,
                         const GnnModel& model) {
  if (z_u.size() != z_v.size())
    throw std::invalid_argument("link_score: embedding dims differ");
  std::vector<double> p(z_u.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = z_u[i] * z_v[i];
  return node_score(p, model);
}

/// Model-predicted criticality table over every element of the model's kind.
inline CriticalityTable predict_scores(const Graph& g, const GnnModel& model,
                                       std::uint64_t seed = 0) {
  const auto z = embed_all(g, model, seed);
  CriticalityTable table;
  table.kind = model.hyper.kind;
  table.metric = model.metric;
  table.base_value = 0.0;  // predictions have no intact-graph metric
  if (model.hyper.kind == ElementKind::node) {
    for (NodeId v = 0; v < g.node_count(); ++v)
      table.entries.push_back({v, node_score(z[static_cast<std::size_t>(v)], model), 0});
  } else {
    const auto edges = g.edges();
    for (std::size_t i = 0; i < edges.size(); ++i)
      table.entries.push_back({static_cast<int>(i),
                               link_score(z[static_cast<std::size_t>(edges[i].first)],
                                          z[static_cast<std::size_t>(edges[i].second)], model),
                               0});
  }
  detail::assign_ranks(table.entries);
  return table;
}

}  // namespace critgraph
