#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace critgraph {

using NodeId = int;

// Undirected edge, normalized to (min, max).
using Edge = std::pair<NodeId, NodeId>;

inline Edge make_edge(NodeId u, NodeId v) {
  return u < v ? Edge{u, v} : Edge{v, u};
}

/// Simple undirected graph over contiguous 0-based node ids.
/// Neighbor lists stay sorted; self-loops and parallel edges are rejected.
class Graph {
 public:
  Graph() = default;

  explicit Graph(int node_count) {
    if (node_count < 0) throw std::invalid_argument("negative node count");
    adj_.resize(static_cast<std::size_t>(node_count));
  }

  int node_count() const { return static_cast<int>(adj_.size()); }
  int edge_count() const { return edge_count_; }

  int degree(NodeId v) const { return static_cast<int>(at(v).size()); }

  const std::vector<NodeId>& neighbors(NodeId v) const { return at(v); }

  bool has_edge(NodeId u, NodeId v) const {
    if (u == v) return false;
    check(u);
    check(v);
    const auto& n = adj_[static_cast<std::size_t>(u)];
    return std::binary_search(n.begin(), n.end(), v);
  }

  void add_edge(NodeId u, NodeId v) {
    check(u);
    check(v);
    if (u == v)
      throw std::invalid_argument("self-loop rejected at node " + std::to_string(u));
    auto& nu = adj_[static_cast<std::size_t>(u)];
    auto it = std::lower_bound(nu.begin(), nu.end(), v);
    if (it != nu.end() && *it == v)
      throw std::invalid_argument("duplicate edge (" + std::to_string(u) + "," +
                                  std::to_string(v) + ")");
    nu.insert(it, v);
    auto& nv = adj_[static_cast<std::size_t>(v)];
    nv.insert(std::lower_bound(nv.begin(), nv.end(), u), u);
    ++edge_count_;
  }

  /// All edges as (min, max) pairs in lexicographic order. The position of an
  /// edge in this list is its canonical edge id.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(static_cast<std::size_t>(edge_count_));
    for (NodeId u = 0; u < node_count(); ++u)
      for (NodeId v : adj_[static_cast<std::size_t>(u)])
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  int max_degree() const {
    int m = 0;
    for (const auto& n : adj_) m = std::max(m, static_cast<int>(n.size()));
    return m;
  }

  bool operator==(const Graph& other) const = default;

 private:
  const std::vector<NodeId>& at(NodeId v) const {
    check(v);
    return adj_[static_cast<std::size_t>(v)];
  }

  void check(NodeId v) const {
    if (v < 0 || v >= node_count())
      throw std::invalid_argument("node id " + std::to_string(v) + " out of range [0," +
                                  std::to_string(node_count()) + ")");
  }

  std::vector<std::vector<NodeId>> adj_;
  int edge_count_ = 0;
};

inline Graph graph_from_edges(int node_count, const std::vector<Edge>& edges) {
  Graph g(node_count);
  for (const auto& [u, v] : edges) g.add_edge(u, v);
  return g;
}

/// Number of connected components via breadth-first traversal; 0 for the
/// empty graph.
inline int connected_components(const Graph& g) {
  const int n = g.node_count();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<NodeId> stack;
  int components = 0;
  for (NodeId s = 0; s < n; ++s) {
    if (seen[static_cast<std::size_t>(s)]) continue;
    ++components;
    seen[static_cast<std::size_t>(s)] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId w : g.neighbors(u)) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    }
  }
  return components;
}

/// Residual graph after deleting one node. Remaining ids are re-indexed
/// contiguously; old_to_new maps original ids (removed node -> -1).
struct NodeRemoval {
  Graph graph;
  std::vector<NodeId> old_to_new;
};

inline NodeRemoval remove_node(const Graph& g, NodeId v) {
  const int n = g.node_count();
  if (v < 0 || v >= n)
    throw std::invalid_argument("remove_node: id " + std::to_string(v) + " out of range");
  NodeRemoval out;
  out.old_to_new.assign(static_cast<std::size_t>(n), -1);
  NodeId next = 0;
  for (NodeId u = 0; u < n; ++u)
    if (u != v) out.old_to_new[static_cast<std::size_t>(u)] = next++;
  out.graph = Graph(n - 1);
  for (NodeId u = 0; u < n; ++u) {
    if (u == v) continue;
    for (NodeId w : g.neighbors(u)) {
      if (w == v || w <= u) continue;
      out.graph.add_edge(out.old_to_new[static_cast<std::size_t>(u)],
                         out.old_to_new[static_cast<std::size_t>(w)]);
    }
  }
  return out;
}

/// Residual graph after deleting one link; node set unchanged.
inline Graph remove_link(const Graph& g, Edge e) {
  const auto [u, v] = make_edge(e.first, e.second);
  if (!g.has_edge(u, v))
    throw std::invalid_argument("remove_link: edge (" + std::to_string(u) + "," +
                                std::to_string(v) + ") not present");
  Graph out(g.node_count());
  for (NodeId a = 0; a < g.node_count(); ++a)
    for (NodeId b : g.neighbors(a))
      if (a < b && !(a == u && b == v)) out.add_edge(a, b);
  return out;
}

/// Mean local clustering coefficient (nodes of degree < 2 contribute 0).
inline double average_clustering(const Graph& g) {
  const int n = g.node_count();
  if (n == 0) return 0.0;
  double total = 0.0;
  for (NodeId v = 0; v < n; ++v) {
    const auto& nb = g.neighbors(v);
    const int d = static_cast<int>(nb.size());
    if (d < 2) continue;
    int closed = 0;
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j)
        if (g.has_edge(nb[i], nb[j])) ++closed;
    total += 2.0 * closed / (static_cast<double>(d) * (d - 1));
  }
  return total / n;
}

}  // namespace critgraph
