#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "critgraph/graph.hpp"
#include "critgraph/metrics.hpp"
#include "critgraph/parallel.hpp"

// Exact criticality scoring: remove each element, recompute the robustness
// metric on the residual graph, rank by impact. Deliberately the slow
// conventional baseline - Theta(|elements| x eigendecomposition).

namespace critgraph {

enum class ElementKind { node, link };

inline const char* kind_name(ElementKind k) { return k == ElementKind::node ? "node" : "link"; }

inline ElementKind kind_from_name(const std::string& s) {
  if (s == "node") return ElementKind::node;
  if (s == "link") return ElementKind::link;
  throw std::invalid_argument("unknown element kind '" + s + "' (expected node or link)");
}

struct CriticalityEntry {
  int element = 0;         // node id, or canonical edge index (Graph::edges order)
  double raw_score = 0.0;  // |metric(G - x) - metric(G)|; +inf marks total disconnection
  int rank = 0;            // 1 = most critical
};

struct CriticalityTable {
  ElementKind kind = ElementKind::node;
  Metric metric = Metric::egr;
  double base_value = 0.0;
  std::vector<CriticalityEntry> entries;  // ascending element id
};

namespace detail {

// Score = magnitude of the metric change. A residual +inf against a finite
// base (or the reverse) is maximal impact; two infinities cancel.
inline double criticality_delta(double base, double residual) {
  const bool bi = std::isinf(base), ri = std::isinf(residual);
  if (bi && ri) return 0.0;
  if (bi || ri) return std::numeric_limits<double>::infinity();
  return std::abs(residual - base);
}

// Rank 1 = largest raw score; ties broken by ascending element id. +inf
// sorts above every finite score. Scores within 1e-9 (relative, floored at
// 1) of a tie group's leader count as tied, so symmetric elements rank by
// id instead of by eigensolver roundoff.
inline bool scores_tie(double leader, double score) {
  if (std::isinf(leader) || std::isinf(score)) return std::isinf(leader) && std::isinf(score);
  return leader - score <= 1e-9 * std::max(1.0, std::abs(leader));
}

inline void assign_ranks(std::vector<CriticalityEntry>& entries) {
  std::vector<int> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    const auto& a = entries[static_cast<std::size_t>(x)];
    const auto& b = entries[static_cast<std::size_t>(y)];
    if (a.raw_score != b.raw_score) return a.raw_score > b.raw_score;
    return a.element < b.element;
  });
  std::size_t group_start = 0;
  while (group_start < order.size()) {
    const double leader = entries[static_cast<std::size_t>(order[group_start])].raw_score;
    std::size_t group_end = group_start + 1;
    while (group_end < order.size() &&
           scores_tie(leader, entries[static_cast<std::size_t>(order[group_end])].raw_score))
      ++group_end;
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(group_start),
              order.begin() + static_cast<std::ptrdiff_t>(group_end), [&](int x, int y) {
                return entries[static_cast<std::size_t>(x)].element <
                       entries[static_cast<std::size_t>(y)].element;
              });
    group_start = group_end;
  }
  for (std::size_t r = 0; r < order.size(); ++r)
    entries[static_cast<std::size_t>(order[r])].rank = static_cast<int>(r) + 1;
}

}  // namespace detail

/// Exact scores for a subset of elements (ids for nodes, canonical edge
/// indices for links). Ranks are assigned within the subset.
inline CriticalityTable score_elements(const Graph& g, ElementKind kind, Metric metric,
                                       const std::vector<int>& elements, int threads = 1) {
  CriticalityTable table;
  table.kind = kind;
  table.metric = metric;
  table.base_value = metric_value(g, metric);
  table.entries.resize(elements.size());
  const std::vector<Edge> edges = kind == ElementKind::link ? g.edges() : std::vector<Edge>{};
  for (int id : elements) {
    const int limit = kind == ElementKind::node ? g.node_count() : static_cast<int>(edges.size());
    if (id < 0 || id >= limit)
      throw std::invalid_argument("score_elements: element " + std::to_string(id) + " out of range");
  }
  parallel_for(static_cast<int>(elements.size()), threads, [&](int i) {
    const int id = elements[static_cast<std::size_t>(i)];
    double residual;
    if (kind == ElementKind::node)
      residual = metric_value(remove_node(g, id).graph, metric);
    else
      residual = metric_value(remove_link(g, edges[static_cast<std::size_t>(id)]), metric);
    table.entries[static_cast<std::size_t>(i)] = {
        id, detail::criticality_delta(table.base_value, residual), 0};
  });
  std::sort(table.entries.begin(), table.entries.end(),
            [](const auto& a, const auto& b) { return a.element < b.element; });
  detail::assign_ranks(table.entries);
  return table;
}

/// Exact scores for every element of the given kind.
inline CriticalityTable score_all(const Graph& g, ElementKind kind, Metric metric,
                                  int threads = 1) {
  if (kind == ElementKind::node && g.node_count() < 3)
    throw std::invalid_argument("node scoring needs at least 3 nodes");
  if (kind == ElementKind::link && g.edge_count() < 1)
    throw std::invalid_argument("link scoring needs at least 1 edge");
  const int count = kind == ElementKind::node ? g.node_count() : g.edge_count();
  std::vector<int> all(static_cast<std::size_t>(count));
  std::iota(all.begin(), all.end(), 0);
  return score_elements(g, kind, metric, all, threads);
}

/// Element ids of the ceil(len * pct/100) highest-ranked entries.
inline std::vector<int> top_percent(const CriticalityTable& t, double pct) {
  if (t.entries.empty()) throw std::invalid_argument("top_percent: empty table");
  if (!(pct > 0.0 && pct <= 100.0))
    throw std::invalid_argument("top_percent: pct must be in (0, 100]");
  const auto len = static_cast<double>(t.entries.size());
  const auto k = static_cast<std::size_t>(std::ceil(len * pct / 100.0));
  std::vector<int> ids;
  ids.reserve(k);
  for (const auto& e : t.entries)
    if (static_cast<std::size_t>(e.rank) <= k) ids.push_back(e.element);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace critgraph
