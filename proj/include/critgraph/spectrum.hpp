#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "critgraph/graph.hpp"
#include "critgraph/sym_eigen.hpp"

namespace critgraph {

enum class LaplacianKind { combinatorial, normalized };

/// Full Laplacian spectrum with the traversal-derived component count.
/// The first component_count eigenvalues are exactly 0 by construction; any
/// consumer excluding "zero" eigenvalues must count, not threshold.
struct LaplacianSpectrum {
  std::vector<double> eigenvalues;  // ascending, length node_count
  LaplacianKind kind = LaplacianKind::combinatorial;
  int component_count = 0;
};

/// Dense Laplacian matrix, row-major. For the normalized kind, isolated
/// nodes get a 0 diagonal (no normalization term exists), so they contribute
/// eigenvalue 0 just as they do in the combinatorial kind.
inline std::vector<double> laplacian_matrix(const Graph& g, LaplacianKind kind) {
  const int n = g.node_count();
  if (n == 0) throw std::invalid_argument("empty graph");
  const auto N = static_cast<std::size_t>(n);
  std::vector<double> m(N * N, 0.0);
  if (kind == LaplacianKind::combinatorial) {
    for (NodeId u = 0; u < n; ++u) {
      m[static_cast<std::size_t>(u) * N + u] = g.degree(u);
      for (NodeId v : g.neighbors(u)) m[static_cast<std::size_t>(u) * N + v] = -1.0;
    }
  } else {
    std::vector<double> inv_sqrt_deg(N, 0.0);
    for (NodeId u = 0; u < n; ++u)
      if (g.degree(u) > 0) inv_sqrt_deg[static_cast<std::size_t>(u)] = 1.0 / std::sqrt(g.degree(u));
    for (NodeId u = 0; u < n; ++u) {
      if (g.degree(u) == 0) continue;
      m[static_cast<std::size_t>(u) * N + u] = 1.0;
      for (NodeId v : g.neighbors(u))
        m[static_cast<std::size_t>(u) * N + v] =
            -inv_sqrt_deg[static_cast<std::size_t>(u)] * inv_sqrt_deg[static_cast<std::size_t>(v)];
    }
  }
  return m;
}

inline LaplacianSpectrum laplacian_spectrum(const Graph& g, LaplacianKind kind) {
  LaplacianSpectrum out;
  out.kind = kind;
  out.component_count = connected_components(g);
  out.eigenvalues = linalg::sym_eigen_values(laplacian_matrix(g, kind), g.node_count());
  // One zero mode per component; pin them so downstream sums never divide by
  // roundoff noise.
  for (int i = 0; i < out.component_count; ++i)
    out.eigenvalues[static_cast<std::size_t>(i)] = 0.0;
  return out;
}

}  // namespace critgraph
