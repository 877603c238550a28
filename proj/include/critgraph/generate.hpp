#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "critgraph/graph.hpp"
#include "critgraph/rng.hpp"

namespace critgraph {

enum class GraphFamily { power_law, power_law_cluster };

inline const char* family_name(GraphFamily f) {
  return f == GraphFamily::power_law ? "pl" : "plc";
}

inline GraphFamily family_from_name(const std::string& s) {
  if (s == "pl") return GraphFamily::power_law;
  if (s == "plc") return GraphFamily::power_law_cluster;
  throw std::invalid_argument("unknown graph family '" + s + "' (expected pl or plc)");
}

struct GeneratorSpec {
  GraphFamily family = GraphFamily::power_law;
  int node_count = 0;
  int edges_per_node = 2;         // m: edges added per arriving node
  double triad_probability = 0.0;  // p: triangle-closing chance (plc only)
  std::uint64_t seed = 0;
};

namespace detail {

// Degree-proportional pick: endpoints is the flat list of edge endpoints
// seen so far, so a uniform draw lands on a node with probability
// proportional to its degree. Redraw until the pick is a valid new
// neighbor of t.
inline NodeId preferential_pick(const Graph& g, const std::vector<NodeId>& endpoints, NodeId t,
                                Rng& rng) {
  for (;;) {
    const NodeId u = endpoints[rand_below(rng, endpoints.size())];
    if (u != t && !g.has_edge(t, u)) return u;
  }
}

}  // namespace detail

/// Grow a preferential-attachment graph (power_law) or a Holme-Kim graph
/// with triangle-closing steps (power_law_cluster). Seed graph is a star on
/// m+1 nodes; every arriving node adds exactly m edges, so the output is
/// connected with m * (N - m) edges. Deterministic under spec.seed.
inline Graph generate(const GeneratorSpec& spec) {
  const int n = spec.node_count;
  const int m = spec.edges_per_node;
  if (n < 3) throw std::invalid_argument("generate: node_count must be >= 3");
  if (m < 1) throw std::invalid_argument("generate: edges_per_node must be >= 1");
  if (m >= n) throw std::invalid_argument("generate: edges_per_node must be < node_count");
  if (!(spec.triad_probability >= 0.0 && spec.triad_probability <= 1.0))
    throw std::invalid_argument("generate: triad_probability must be in [0, 1]");
  const bool cluster = spec.family == GraphFamily::power_law_cluster;

  Graph g(n);
  Rng rng(spec.seed);
  std::vector<NodeId> endpoints;
  endpoints.reserve(static_cast<std::size_t>(2 * m) * static_cast<std::size_t>(n));
  for (NodeId leaf = 1; leaf <= m; ++leaf) {
    g.add_edge(0, leaf);
    endpoints.push_back(0);
    endpoints.push_back(leaf);
  }

  std::vector<NodeId> triad_pool;
  for (NodeId t = m + 1; t < n; ++t) {
    NodeId last = detail::preferential_pick(g, endpoints, t, rng);
    g.add_edge(t, last);
    endpoints.push_back(last);
    int added = 1;
    while (added < m) {
      if (cluster && rand_unit(rng) < spec.triad_probability) {
        // Close a triangle through a fresh neighbor of the node t last
        // attached to; fall back to preferential attachment when none exist.
        triad_pool.clear();
        for (NodeId w : g.neighbors(last))
          if (w != t && !g.has_edge(t, w)) triad_pool.push_back(w);
        if (!triad_pool.empty()) {
          const NodeId w = triad_pool[rand_below(rng, triad_pool.size())];
          g.add_edge(t, w);
          endpoints.push_back(w);
          ++added;
          continue;
        }
      }
      const NodeId u = detail::preferential_pick(g, endpoints, t, rng);
      g.add_edge(t, u);
      endpoints.push_back(u);
      last = u;
      ++added;
    }
    endpoints.insert(endpoints.end(), static_cast<std::size_t>(m), t);
  }
  return g;
}

}  // namespace critgraph
