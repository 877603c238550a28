#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "critgraph/corpus.hpp"
#include "critgraph/eval.hpp"
#include "critgraph/model.hpp"
#include "critgraph/rng.hpp"

// End-to-end training on oracle-labeled corpora with the pairwise ranking
// loss: cross-entropy between sigmoid(score difference) and a target derived
// from the ground-truth score difference. Gradients are exact reverse-mode
// accumulation through the full forward pass (attention softmax included),
// hand-rolled against the cached intermediates.

namespace critgraph {

struct TrainConfig {
  int epochs = 60;
  int pairs_per_graph_per_epoch = 0;  // 0 -> 20 per labeled element
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  int early_stop_patience = 10;
  int validation_pairs = 4000;

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (learning_rate <= 0.0) throw std::invalid_argument("train: learning rate must be positive");
    if (early_stop_patience < 0) throw std::invalid_argument("train: patience must be >= 0");
    if (pairs_per_graph_per_epoch < 0)
      throw std::invalid_argument("train: pairs_per_graph_per_epoch must be >= 0");
  }
};

/// One training comparison: entry positions (i, j) into a graph's labeled
/// table and the soft target f(r_i - r_j).
struct RankPair {
  int graph = 0;
  int i = 0;
  int j = 0;
  double label = 0.5;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Stable log(sigmoid(x)); never forms 1 - sigmoid(x).
inline double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

namespace detail {

constexpr double kLossClamp = 1e-12;

struct LossGrad {
  double loss;
  double dy;  // d loss / d (y_i - y_j)
};

// Cross entropy of sigmoid(yhat) against the soft label, with log arguments
// clamped to [1e-12, 1 - 1e-12]. Both terms go through log_sigmoid, so
// swapping the pair (negating yhat, complementing the label) reproduces the
// loss to machine precision. The gradient is of the clamped function (zero
// where a clamp is active), so finite differences agree everywhere.
inline LossGrad ranking_loss_grad(double yhat, double label) {
  const double lo = std::log(kLossClamp);
  const double hi = std::log1p(-kLossClamp);
  const double ls_pos = log_sigmoid(yhat);   // log p
  const double ls_neg = log_sigmoid(-yhat);  // log (1 - p)
  auto clamped = [&](double ls) {
    return std::pair<double, double>{std::clamp(ls, lo, hi), ls > lo && ls < hi ? 1.0 : 0.0};
  };
  const auto [lp, mask_p] = clamped(ls_pos);
  const auto [ln, mask_n] = clamped(ls_neg);
  const double loss = -label * lp - (1.0 - label) * ln;
  // d log_sigmoid(x)/dx = sigmoid(-x)
  const double dy =
      -label * mask_p * std::exp(ls_neg) + (1.0 - label) * mask_n * std::exp(ls_pos);
  return {loss, dy};
}

}  // namespace detail

/// Pairwise ranking loss L_ij for raw scores y and ground-truth criticality
/// values r (target f(r_i - r_j) with f the logistic sigmoid).
inline double ranking_loss(double y_i, double y_j, double r_i, double r_j) {
  return detail::ranking_loss_grad(y_i - y_j, sigmoid(r_i - r_j)).loss;
}

/// Ground-truth scores min-max scaled to [0,1] within one table; the +inf
/// disconnection sentinel pins to the top of the scale. Ordering is
/// unchanged; only the scale feeding f(r_ij) is tamed.
inline std::vector<double> normalized_scores(const CriticalityTable& t) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& e : t.entries)
    if (std::isfinite(e.raw_score)) {
      lo = std::min(lo, e.raw_score);
      hi = std::max(hi, e.raw_score);
    }
  std::vector<double> out(t.entries.size(), 1.0);
  if (!std::isfinite(lo)) return out;  // every score was the sentinel
  const double range = hi - lo;
  for (std::size_t k = 0; k < t.entries.size(); ++k) {
    const double raw = t.entries[k].raw_score;
    if (std::isinf(raw)) continue;  // stays 1.0
    out[k] = range > 0.0 ? (raw - lo) / range : 0.5;
  }
  return out;
}

namespace detail {

struct NodeLayerCache {
  std::vector<NodeId> nbrs;
  std::vector<double> m_self;  // q (empty when no neighbors)
  std::vector<double> m_nbr;   // nbrs.size() x q, row-major
  std::vector<double> logits;  // raw attention inputs t_k (pre leaky-relu)
  std::vector<double> alpha;
  std::vector<double> concat;  // [h_prev || h_skip || h_nbr]
  std::vector<double> preact;  // combine pre-activation
};

struct ForwardCache {
  // h[l][v]: embeddings after layer l (h[0] = input features).
  std::vector<std::vector<std::vector<double>>> h;
  std::vector<std::vector<NodeLayerCache>> layers;
};

inline void forward_all(const Graph& g, const GnnModel& model, std::uint64_t seed,
                        ForwardCache& cache) {
  const int n = g.node_count();
  const int L = model.hyper.layer_count();
  cache.h.assign(static_cast<std::size_t>(L) + 1, {});
  cache.layers.assign(static_cast<std::size_t>(L), {});
  cache.h[0] = init_features(g, model.hyper.input_feature_dim, model.hyper.degree_feature);
  for (int l = 0; l < L; ++l) {
    const GnnLayer& layer = model.layers[static_cast<std::size_t>(l)];
    const int q = layer.aggregate.rows;
    const auto& h_prev = cache.h[static_cast<std::size_t>(l)];
    const auto& h_skip = cache.h[static_cast<std::size_t>(std::max(l - 1, 0))];
    auto& out = cache.h[static_cast<std::size_t>(l) + 1];
    out.assign(static_cast<std::size_t>(n), {});
    auto& node_caches = cache.layers[static_cast<std::size_t>(l)];
    node_caches.assign(static_cast<std::size_t>(n), {});
    for (NodeId v = 0; v < n; ++v) {
      NodeLayerCache& nc = node_caches[static_cast<std::size_t>(v)];
      nc.nbrs = neighborhood(g, v, model.hyper.neighbor_sample_cap, seed, l);
      std::vector<double> pooled(static_cast<std::size_t>(q), 0.0);
      if (!nc.nbrs.empty()) {
        nc.m_self = matvec(layer.aggregate, h_prev[static_cast<std::size_t>(v)]);
        double self_logit = 0.0;
        for (int i = 0; i < q; ++i)
          self_logit += layer.attention[static_cast<std::size_t>(i)] * nc.m_self[static_cast<std::size_t>(i)];
        nc.m_nbr.resize(nc.nbrs.size() * static_cast<std::size_t>(q));
        nc.logits.resize(nc.nbrs.size());
        for (std::size_t k = 0; k < nc.nbrs.size(); ++k) {
          const auto mk = matvec(layer.aggregate, h_prev[static_cast<std::size_t>(nc.nbrs[k])]);
          std::copy(mk.begin(), mk.end(), nc.m_nbr.begin() + static_cast<std::ptrdiff_t>(k * q));
          double t = self_logit;
          for (int i = 0; i < q; ++i)
            t += layer.attention[static_cast<std::size_t>(q + i)] * mk[static_cast<std::size_t>(i)];
          nc.logits[k] = t;
        }
        double max_e = -std::numeric_limits<double>::infinity();
        for (double t : nc.logits) max_e = std::max(max_e, leaky_relu(t));
        nc.alpha.resize(nc.nbrs.size());
        double denom = 0.0;
        for (std::size_t k = 0; k < nc.nbrs.size(); ++k) {
          nc.alpha[k] = std::exp(leaky_relu(nc.logits[k]) - max_e);
          denom += nc.alpha[k];
        }
        for (std::size_t k = 0; k < nc.nbrs.size(); ++k) {
          nc.alpha[k] /= denom;
          for (int i = 0; i < q; ++i)
            pooled[static_cast<std::size_t>(i)] += nc.alpha[k] * nc.m_nbr[k * static_cast<std::size_t>(q) + static_cast<std::size_t>(i)];
        }
      }
      nc.concat.clear();
      nc.concat.reserve(static_cast<std::size_t>(layer.combine.cols));
      const auto& prev = h_prev[static_cast<std::size_t>(v)];
      const auto& skip = h_skip[static_cast<std::size_t>(v)];
      nc.concat.insert(nc.concat.end(), prev.begin(), prev.end());
      nc.concat.insert(nc.concat.end(), skip.begin(), skip.end());
      nc.concat.insert(nc.concat.end(), pooled.begin(), pooled.end());
      nc.preact = matvec(layer.combine, nc.concat);
      auto& hv = out[static_cast<std::size_t>(v)];
      hv.resize(nc.preact.size());
      for (std::size_t i = 0; i < nc.preact.size(); ++i) hv[i] = relu(nc.preact[i]);
    }
  }
}

struct RegressionCache {
  std::vector<std::vector<double>> acts;  // acts[0] = input embedding
  std::vector<std::vector<double>> pre;   // pre-activation per layer
};

inline double regression_forward(const GnnModel& model, std::vector<double> input,
                                 RegressionCache& rc) {
  rc.acts.clear();
  rc.pre.clear();
  rc.acts.push_back(std::move(input));
  const std::size_t last = model.reg_weights.size() - 1;
  for (std::size_t r = 0; r < model.reg_weights.size(); ++r) {
    std::vector<double> y = matvec(model.reg_weights[r], rc.acts.back());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += model.reg_bias[r][i];
    rc.pre.push_back(y);
    if (r != last)
      for (double& v : y) v = relu(v);
    rc.acts.push_back(std::move(y));
  }
  return rc.acts.back().at(0);
}

// d loss / d input given d loss / d scalar output; parameter grads
// accumulate into grads.
inline std::vector<double> regression_backward(const GnnModel& model, const RegressionCache& rc,
                                               double dscore, GnnModel& grads) {
  const std::size_t last = model.reg_weights.size() - 1;
  std::vector<double> dact{dscore};
  for (std::size_t ri = model.reg_weights.size(); ri-- > 0;) {
    std::vector<double> dpre = dact;
    if (ri != last)
      for (std::size_t i = 0; i < dpre.size(); ++i) dpre[i] *= relu_grad(rc.pre[ri][i]);
    const auto& in = rc.acts[ri];
    Mat& gw = grads.reg_weights[ri];
    for (int r = 0; r < gw.rows; ++r) {
      const double dr = dpre[static_cast<std::size_t>(r)];
      grads.reg_bias[ri][static_cast<std::size_t>(r)] += dr;
      double* grow = &gw.a[static_cast<std::size_t>(r) * gw.cols];
      for (int c = 0; c < gw.cols; ++c) grow[c] += dr * in[static_cast<std::size_t>(c)];
    }
    const Mat& w = model.reg_weights[ri];
    std::vector<double> din(static_cast<std::size_t>(w.cols), 0.0);
    for (int r = 0; r < w.rows; ++r) {
      const double dr = dpre[static_cast<std::size_t>(r)];
      const double* wrow = &w.a[static_cast<std::size_t>(r) * w.cols];
      for (int c = 0; c < w.cols; ++c) din[static_cast<std::size_t>(c)] += dr * wrow[c];
    }
    dact = std::move(din);
  }
  return dact;
}

// Reverse pass through the stacked aggregation/combination layers.
// dz[v] holds d loss / d h^L_v on entry.
inline void gnn_backward(const Graph& g, const GnnModel& model, const ForwardCache& cache,
                         std::vector<std::vector<double>> dz, GnnModel& grads) {
  const int n = g.node_count();
  const int L = model.hyper.layer_count();
  // dh[l][v] = d loss / d h^l_v; filled from the top down.
  std::vector<std::vector<std::vector<double>>> dh(static_cast<std::size_t>(L) + 1);
  for (int l = 0; l <= L; ++l) {
    const int dim = l == 0 ? model.hyper.input_feature_dim
                           : model.hyper.embedding_dims[static_cast<std::size_t>(l) - 1];
    dh[static_cast<std::size_t>(l)].assign(static_cast<std::size_t>(n),
                                           std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  }
  dh[static_cast<std::size_t>(L)] = std::move(dz);

  for (int l = L - 1; l >= 0; --l) {
    const GnnLayer& layer = model.layers[static_cast<std::size_t>(l)];
    GnnLayer& glayer = grads.layers[static_cast<std::size_t>(l)];
    const int q = layer.aggregate.rows;
    const int in_self = model.hyper.layer_in(l);
    const int in_skip = model.hyper.layer_skip(l);
    const int skip_level = std::max(l - 1, 0);
    const auto& h_prev = cache.h[static_cast<std::size_t>(l)];
    for (NodeId v = 0; v < n; ++v) {
      const auto& dout = dh[static_cast<std::size_t>(l) + 1][static_cast<std::size_t>(v)];
      const NodeLayerCache& nc = cache.layers[static_cast<std::size_t>(l)][static_cast<std::size_t>(v)];
      // relu + combine weights
      std::vector<double> ds(dout.size());
      bool all_zero = true;
      for (std::size_t i = 0; i < dout.size(); ++i) {
        ds[i] = dout[i] * relu_grad(nc.preact[i]);
        all_zero = all_zero && ds[i] == 0.0;
      }
      if (all_zero) continue;
      for (int r = 0; r < layer.combine.rows; ++r) {
        const double dr = ds[static_cast<std::size_t>(r)];
        if (dr == 0.0) continue;
        double* grow = &glayer.combine.a[static_cast<std::size_t>(r) * layer.combine.cols];
        for (int c = 0; c < layer.combine.cols; ++c)
          grow[c] += dr * nc.concat[static_cast<std::size_t>(c)];
      }
      std::vector<double> du(static_cast<std::size_t>(layer.combine.cols), 0.0);
      for (int r = 0; r < layer.combine.rows; ++r) {
        const double dr = ds[static_cast<std::size_t>(r)];
        if (dr == 0.0) continue;
        const double* wrow = &layer.combine.a[static_cast<std::size_t>(r) * layer.combine.cols];
        for (int c = 0; c < layer.combine.cols; ++c) du[static_cast<std::size_t>(c)] += dr * wrow[c];
      }
      // split the concat gradient
      auto& dself = dh[static_cast<std::size_t>(l)][static_cast<std::size_t>(v)];
      for (int i = 0; i < in_self; ++i) dself[static_cast<std::size_t>(i)] += du[static_cast<std::size_t>(i)];
      auto& dskip = dh[static_cast<std::size_t>(skip_level)][static_cast<std::size_t>(v)];
      for (int i = 0; i < in_skip; ++i)
        dskip[static_cast<std::size_t>(i)] += du[static_cast<std::size_t>(in_self + i)];
      if (nc.nbrs.empty()) continue;
      // aggregation backward
      std::vector<double> dpool(du.begin() + in_self + in_skip, du.end());
      const std::size_t K = nc.nbrs.size();
      std::vector<double> dalpha(K, 0.0);
      std::vector<double> dm(K * static_cast<std::size_t>(q), 0.0);  // d loss / d m_k
      for (std::size_t k = 0; k < K; ++k) {
        const double* mk = &nc.m_nbr[k * static_cast<std::size_t>(q)];
        double s = 0.0;
        for (int i = 0; i < q; ++i) {
          s += dpool[static_cast<std::size_t>(i)] * mk[i];
          dm[k * static_cast<std::size_t>(q) + static_cast<std::size_t>(i)] +=
              nc.alpha[k] * dpool[static_cast<std::size_t>(i)];
        }
        dalpha[k] = s;
      }
      double alpha_dot = 0.0;
      for (std::size_t k = 0; k < K; ++k) alpha_dot += nc.alpha[k] * dalpha[k];
      std::vector<double> dm_self(static_cast<std::size_t>(q), 0.0);
      for (std::size_t k = 0; k < K; ++k) {
        const double de = nc.alpha[k] * (dalpha[k] - alpha_dot);  // softmax backward
        const double dt = de * leaky_relu_grad(nc.logits[k]);
        if (dt == 0.0) continue;
        const double* mk = &nc.m_nbr[k * static_cast<std::size_t>(q)];
        for (int i = 0; i < q; ++i) {
          glayer.attention[static_cast<std::size_t>(i)] += dt * nc.m_self[static_cast<std::size_t>(i)];
          glayer.attention[static_cast<std::size_t>(q + i)] += dt * mk[i];
          dm_self[static_cast<std::size_t>(i)] += dt * layer.attention[static_cast<std::size_t>(i)];
          dm[k * static_cast<std::size_t>(q) + static_cast<std::size_t>(i)] +=
              dt * layer.attention[static_cast<std::size_t>(q + i)];
        }
      }
      // m_self = Q h_v, m_k = Q h_k
      const auto& hv = h_prev[static_cast<std::size_t>(v)];
      for (int r = 0; r < q; ++r) {
        const double dr = dm_self[static_cast<std::size_t>(r)];
        if (dr == 0.0) continue;
        double* grow = &glayer.aggregate.a[static_cast<std::size_t>(r) * layer.aggregate.cols];
        for (int c = 0; c < layer.aggregate.cols; ++c) grow[c] += dr * hv[static_cast<std::size_t>(c)];
      }
      {
        bool any = false;
        for (double x : dm_self) any = any || x != 0.0;
        if (any)
          for (int c = 0; c < layer.aggregate.cols; ++c) {
            double s = 0.0;
            for (int r = 0; r < q; ++r)
              s += layer.aggregate.a[static_cast<std::size_t>(r) * layer.aggregate.cols + c] *
                   dm_self[static_cast<std::size_t>(r)];
            dself[static_cast<std::size_t>(c)] += s;
          }
      }
      for (std::size_t k = 0; k < K; ++k) {
        const double* dmk = &dm[k * static_cast<std::size_t>(q)];
        const auto& hk = h_prev[static_cast<std::size_t>(nc.nbrs[k])];
        auto& dhk = dh[static_cast<std::size_t>(l)][static_cast<std::size_t>(nc.nbrs[k])];
        for (int r = 0; r < q; ++r) {
          const double dr = dmk[r];
          if (dr == 0.0) continue;
          double* grow = &glayer.aggregate.a[static_cast<std::size_t>(r) * layer.aggregate.cols];
          for (int c = 0; c < layer.aggregate.cols; ++c) {
            grow[c] += dr * hk[static_cast<std::size_t>(c)];
            dhk[static_cast<std::size_t>(c)] +=
                dr * layer.aggregate.a[static_cast<std::size_t>(r) * layer.aggregate.cols + c];
          }
        }
      }
    }
  }
}

}  // namespace detail

struct LossAndGradients {
  double loss = 0.0;
  GnnModel gradients;  // same shapes as the model, holding d(mean loss)/d(param)
};

/// Exact gradients of the mean ranking loss over a batch of pairs.
/// Pair indices address positions in each corpus entry's truth table;
/// labels are f(r_i - r_j) on the normalized scores.
inline LossAndGradients loss_and_gradients(const GnnModel& model, const TrainingCorpus& corpus,
                                           std::span<const RankPair> batch,
                                           std::uint64_t sample_seed) {
  LossAndGradients out;
  out.gradients = zero_model(model.hyper, model.metric, model.family_tag);
  if (batch.empty()) return out;
  std::map<int, std::vector<RankPair>> by_graph;
  for (const RankPair& p : batch) {
    if (p.graph < 0 || p.graph >= static_cast<int>(corpus.entries.size()))
      throw std::invalid_argument("rank pair references unknown graph");
    by_graph[p.graph].push_back(p);
  }
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (const auto& [graph_index, pairs] : by_graph) {
    const CorpusEntry& entry = corpus.entries[static_cast<std::size_t>(graph_index)];
    const Graph& g = entry.graph;
    detail::ForwardCache cache;
    detail::forward_all(g, model, sample_seed, cache);
    const auto& z = cache.h.back();
    const std::vector<Edge> edges =
        corpus.kind == ElementKind::link ? g.edges() : std::vector<Edge>{};

    // score every element position touched by some pair
    std::vector<int> positions;
    for (const RankPair& p : pairs) {
      positions.push_back(p.i);
      positions.push_back(p.j);
    }
    std::sort(positions.begin(), positions.end());
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
    std::map<int, std::size_t> slot;
    std::vector<detail::RegressionCache> reg(positions.size());
    std::vector<double> scores(positions.size());
    std::vector<double> dscores(positions.size(), 0.0);
    for (std::size_t s = 0; s < positions.size(); ++s) {
      const int pos = positions[s];
      if (pos < 0 || pos >= static_cast<int>(entry.truth.entries.size()))
        throw std::invalid_argument("rank pair references element outside the table");
      slot[pos] = s;
      const int element = entry.truth.entries[static_cast<std::size_t>(pos)].element;
      std::vector<double> input;
      if (corpus.kind == ElementKind::node) {
        input = z[static_cast<std::size_t>(element)];
      } else {
        const auto& [u, v] = edges[static_cast<std::size_t>(element)];
        input.resize(z[static_cast<std::size_t>(u)].size());
        for (std::size_t i = 0; i < input.size(); ++i)
          input[i] = z[static_cast<std::size_t>(u)][i] * z[static_cast<std::size_t>(v)][i];
      }
      scores[s] = detail::regression_forward(model, std::move(input), reg[s]);
    }
    for (const RankPair& p : pairs) {
      const auto [loss, dy] =
          detail::ranking_loss_grad(scores[slot[p.i]] - scores[slot[p.j]], p.label);
      out.loss += loss * inv_batch;
      dscores[slot[p.i]] += dy * inv_batch;
      dscores[slot[p.j]] -= dy * inv_batch;
    }
    // regression backward per element, then one pass through the GNN
    std::vector<std::vector<double>> dz(
        z.size(), std::vector<double>(static_cast<std::size_t>(model.hyper.embedding_dim()), 0.0));
    for (std::size_t s = 0; s < positions.size(); ++s) {
      if (dscores[s] == 0.0) continue;
      const std::vector<double> dinput =
          detail::regression_backward(model, reg[s], dscores[s], out.gradients);
      const int element = entry.truth.entries[static_cast<std::size_t>(positions[s])].element;
      if (corpus.kind == ElementKind::node) {
        auto& d = dz[static_cast<std::size_t>(element)];
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += dinput[i];
      } else {
        const auto& [u, v] = edges[static_cast<std::size_t>(element)];
        auto& du = dz[static_cast<std::size_t>(u)];
        auto& dv = dz[static_cast<std::size_t>(v)];
        for (std::size_t i = 0; i < du.size(); ++i) {
          du[i] += dinput[i] * z[static_cast<std::size_t>(v)][i];
          dv[i] += dinput[i] * z[static_cast<std::size_t>(u)][i];
        }
      }
    }
    detail::gnn_backward(g, model, cache, std::move(dz), out.gradients);
  }
  return out;
}

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  GnnModel model;
  std::vector<EpochRecord> log;
  double best_val_accuracy = 0.0;
  int best_epoch = 0;  // 0 = initial parameters
};

namespace detail {

struct AdamState {
  GnnModel m, v;
  int t = 0;
};

inline std::vector<std::pair<double*, std::size_t>> tensor_slots(GnnModel& model) {
  std::vector<std::pair<double*, std::size_t>> slots;
  visit_tensors(model,
                [&](const std::string&, const std::vector<int>&, double* data, std::size_t len) {
                  slots.emplace_back(data, len);
                });
  return slots;
}

inline std::vector<std::pair<const double*, std::size_t>> tensor_slots(const GnnModel& model) {
  std::vector<std::pair<const double*, std::size_t>> slots;
  visit_tensors(model, [&](const std::string&, const std::vector<int>&, const double* data,
                           std::size_t len) { slots.emplace_back(data, len); });
  return slots;
}

inline void adam_step(GnnModel& model, const GnnModel& grads, AdamState& state,
                      const TrainConfig& cfg) {
  ++state.t;
  auto params = tensor_slots(model);
  auto g = tensor_slots(grads);
  auto m = tensor_slots(state.m);
  auto v = tensor_slots(state.v);
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, state.t);
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, state.t);
  for (std::size_t s = 0; s < params.size(); ++s) {
    double* p = params[s].first;
    const double* gd = g[s].first;
    double* md = m[s].first;
    double* vd = v[s].first;
    for (std::size_t i = 0; i < params[s].second; ++i) {
      md[i] = cfg.adam_beta1 * md[i] + (1.0 - cfg.adam_beta1) * gd[i];
      vd[i] = cfg.adam_beta2 * vd[i] + (1.0 - cfg.adam_beta2) * gd[i] * gd[i];
      p[i] -= cfg.learning_rate * (md[i] / bc1) / (std::sqrt(vd[i] / bc2) + cfg.adam_eps);
    }
  }
}

// Positions a graph's pairs may draw from: masked elements when a mask is
// present, every element otherwise.
inline std::vector<int> labeled_positions(const CorpusEntry& entry) {
  std::vector<int> positions;
  if (entry.mask.empty()) {
    positions.resize(entry.truth.entries.size());
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i);
    return positions;
  }
  for (int element : entry.mask) {
    bool found = false;
    for (std::size_t i = 0; i < entry.truth.entries.size(); ++i)
      if (entry.truth.entries[i].element == element) {
        positions.push_back(static_cast<int>(i));
        found = true;
        break;
      }
    if (!found) throw std::invalid_argument("corpus mask references unlabeled element");
  }
  std::sort(positions.begin(), positions.end());
  return positions;
}

// Uniform ordered pairs, with a quarter of the draws anchoring one endpoint
// in the ground truth's top decile to sharpen head-of-ranking resolution.
inline std::vector<RankPair> sample_pairs(const CorpusEntry& entry, int graph_index, int count,
                                          const std::vector<int>& positions,
                                          const std::vector<double>& norm_scores, Rng& rng) {
  std::vector<RankPair> out;
  if (positions.size() < 2 || count <= 0) return out;
  std::vector<int> by_rank = positions;
  std::sort(by_rank.begin(), by_rank.end(), [&](int a, int b) {
    return entry.truth.entries[static_cast<std::size_t>(a)].rank <
           entry.truth.entries[static_cast<std::size_t>(b)].rank;
  });
  const std::size_t decile =
      std::min(by_rank.size(), std::max<std::size_t>(2, (by_rank.size() + 9) / 10));
  out.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    const bool head = s % 4 == 0;  // 25% of draws
    int pi, pj;
    if (head) {
      pi = by_rank[rand_below(rng, decile)];
      do {
        pj = positions[rand_below(rng, positions.size())];
      } while (pj == pi);
    } else {
      const auto a = rand_below(rng, positions.size());
      auto b = rand_below(rng, positions.size() - 1);
      if (b >= a) ++b;
      pi = positions[a];
      pj = positions[b];
    }
    out.push_back({graph_index, pi, pj,
                   sigmoid(norm_scores[static_cast<std::size_t>(pi)] -
                           norm_scores[static_cast<std::size_t>(pj)])});
  }
  return out;
}

// Ordering accuracy of model scores against the truth on sampled position
// pairs; truth near-ties count as correct.
inline double ordering_accuracy(const CorpusEntry& entry, const std::vector<int>& positions,
                                const std::vector<double>& model_scores, int sample_pairs,
                                std::uint64_t seed) {
  if (positions.size() < 2) return 1.0;
  Rng rng(seed);
  int correct = 0;
  for (int s = 0; s < sample_pairs; ++s) {
    const auto a = rand_below(rng, positions.size());
    auto b = rand_below(rng, positions.size() - 1);
    if (b >= a) ++b;
    const auto pa = static_cast<std::size_t>(positions[a]);
    const auto pb = static_cast<std::size_t>(positions[b]);
    const double ta = entry.truth.entries[pa].raw_score;
    const double tb = entry.truth.entries[pb].raw_score;
    if (ta == tb || scores_tie(std::max(ta, tb), std::min(ta, tb))) {
      ++correct;
      continue;
    }
    const double ya = model_scores[pa];
    const double yb = model_scores[pb];
    if ((ta > tb && ya > yb) || (ta < tb && ya < yb)) ++correct;
  }
  return static_cast<double>(correct) / sample_pairs;
}

// Model scores for every table position of one corpus entry.
inline std::vector<double> entry_model_scores(const CorpusEntry& entry, ElementKind kind,
                                              const GnnModel& model, std::uint64_t sample_seed) {
  const auto z = embed_all(entry.graph, model, sample_seed);
  const std::vector<Edge> edges = kind == ElementKind::link ? entry.graph.edges() : std::vector<Edge>{};
  std::vector<double> scores(entry.truth.entries.size());
  for (std::size_t p = 0; p < entry.truth.entries.size(); ++p) {
    const int element = entry.truth.entries[p].element;
    if (kind == ElementKind::node)
      scores[p] = node_score(z[static_cast<std::size_t>(element)], model);
    else {
      const auto& [u, v] = edges[static_cast<std::size_t>(element)];
      scores[p] = link_score(z[static_cast<std::size_t>(u)], z[static_cast<std::size_t>(v)], model);
    }
  }
  return scores;
}

inline TrainResult train_impl(GnnModel model, const TrainingCorpus& corpus,
                              const TrainConfig& cfg) {
  cfg.validate();
  if (corpus.entries.empty()) throw std::invalid_argument("train: empty corpus");
  if (model.hyper.kind != corpus.kind)
    throw std::invalid_argument("train: model kind does not match corpus kind");
  for (const auto& entry : corpus.entries)
    if (labeled_positions(entry).size() < 2)
      throw std::invalid_argument("train: every graph needs at least 2 labeled elements");

  const int n_graphs = static_cast<int>(corpus.entries.size());
  // Hold out whole graphs for validation; a single-graph corpus validates on
  // its own (also trained) graph.
  std::vector<int> indices(static_cast<std::size_t>(n_graphs));
  for (int i = 0; i < n_graphs; ++i) indices[static_cast<std::size_t>(i)] = i;
  {
    Rng rng(derive_seed(cfg.seed, 0x5b117));
    for (int i = n_graphs - 1; i > 0; --i) {
      const auto j = rand_below(rng, static_cast<std::uint64_t>(i + 1));
      std::swap(indices[static_cast<std::size_t>(i)], indices[j]);
    }
  }
  const int val_count = n_graphs >= 2 ? std::max(1, n_graphs / 10) : 0;
  std::vector<int> val_graphs(indices.end() - val_count, indices.end());
  std::vector<int> train_graphs(indices.begin(), indices.end() - val_count);
  if (val_graphs.empty()) val_graphs = train_graphs;

  std::vector<std::vector<int>> positions(static_cast<std::size_t>(n_graphs));
  std::vector<std::vector<double>> norms(static_cast<std::size_t>(n_graphs));
  for (int gi = 0; gi < n_graphs; ++gi) {
    positions[static_cast<std::size_t>(gi)] = labeled_positions(corpus.entries[static_cast<std::size_t>(gi)]);
    norms[static_cast<std::size_t>(gi)] = normalized_scores(corpus.entries[static_cast<std::size_t>(gi)].truth);
  }

  const std::uint64_t val_sample_seed = derive_seed(cfg.seed, 0x7a1);
  auto validation_accuracy = [&](const GnnModel& m) {
    double total = 0.0;
    for (int gi : val_graphs) {
      const auto& entry = corpus.entries[static_cast<std::size_t>(gi)];
      const auto scores = entry_model_scores(entry, corpus.kind, m, val_sample_seed);
      total += ordering_accuracy(entry, positions[static_cast<std::size_t>(gi)], scores,
                                 cfg.validation_pairs,
                                 derive_seed(cfg.seed, 0x7a2, static_cast<std::uint64_t>(gi)));
    }
    return total / static_cast<double>(val_graphs.size());
  };

  TrainResult result;
  result.model = model;
  result.best_val_accuracy = validation_accuracy(model);
  result.best_epoch = 0;

  AdamState adam;
  adam.m = zero_model(model.hyper, model.metric, model.family_tag);
  adam.v = zero_model(model.hyper, model.metric, model.family_tag);

  int epochs_since_best = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (epochs_since_best >= cfg.early_stop_patience) break;
    std::vector<int> order = train_graphs;
    {
      Rng rng(derive_seed(cfg.seed, 0x0d3, static_cast<std::uint64_t>(epoch)));
      for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
        const auto j = rand_below(rng, static_cast<std::uint64_t>(i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[j]);
      }
    }
    const std::uint64_t sample_seed = derive_seed(cfg.seed, 0x5a3, static_cast<std::uint64_t>(epoch));
    double loss_total = 0.0;
    for (int gi : order) {
      const auto& pos = positions[static_cast<std::size_t>(gi)];
      const int pair_count = cfg.pairs_per_graph_per_epoch > 0
                                 ? cfg.pairs_per_graph_per_epoch
                                 : 20 * static_cast<int>(pos.size());
      Rng rng(derive_seed(cfg.seed, 0x9a14, static_cast<std::uint64_t>(epoch),
                          static_cast<std::uint64_t>(gi)));
      const auto batch =
          sample_pairs(corpus.entries[static_cast<std::size_t>(gi)], gi, pair_count, pos,
                       norms[static_cast<std::size_t>(gi)], rng);
      const auto lg = loss_and_gradients(model, corpus, batch, sample_seed);
      if (!std::isfinite(lg.loss))
        throw numeric_error("training diverged (loss not finite) at epoch " +
                            std::to_string(epoch));
      adam_step(model, lg.gradients, adam, cfg);
      loss_total += lg.loss;
    }
    const double mean_loss = loss_total / static_cast<double>(order.empty() ? 1 : order.size());
    const double val_acc = validation_accuracy(model);
    result.log.push_back({epoch, mean_loss, val_acc});
    if (val_acc > result.best_val_accuracy + 1e-12) {
      result.best_val_accuracy = val_acc;
      result.best_epoch = epoch;
      result.model = model;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
    }
  }
  return result;
}

}  // namespace detail

/// Train a fresh model on an oracle-labeled corpus. Returns the snapshot
/// with the best validation pairwise-ordering accuracy (early stopping on
/// cfg.early_stop_patience). Deterministic under cfg.seed.
inline TrainResult train(const TrainingCorpus& corpus, GnnHyperparams hyper,
                         const TrainConfig& cfg) {
  hyper.kind = corpus.kind;
  hyper.validate();
  GnnModel model =
      init_model(hyper, corpus.metric, family_name(corpus.family), derive_seed(cfg.seed, 0x141));
  model.training_seed = cfg.seed;
  return detail::train_impl(std::move(model), corpus, cfg);
}

/// Continue optimization from an existing model on a new corpus (transfer
/// learning). Identical mechanics to train, warm-started; with patience 0
/// the base parameters come back untouched.
inline TrainResult fine_tune(const GnnModel& base, const TrainingCorpus& corpus,
                             const TrainConfig& cfg) {
  base.hyper.validate();
  if (base.hyper.kind != corpus.kind)
    throw std::invalid_argument("fine_tune: model kind does not match corpus kind");
  return detail::train_impl(base, corpus, cfg);
}

}  // namespace critgraph
