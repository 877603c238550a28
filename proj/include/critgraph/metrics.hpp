#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "critgraph/spectrum.hpp"

namespace critgraph {

enum class Metric { egr, ws4 };

inline const char* metric_name(Metric m) { return m == Metric::egr ? "egr" : "ws4"; }

inline Metric metric_from_name(const std::string& s) {
  if (s == "egr") return Metric::egr;
  if (s == "ws4") return Metric::ws4;
  throw std::invalid_argument("unknown metric '" + s + "' (expected egr or ws4)");
}

/// Effective graph resistance: (2/(N-1)) * sum of reciprocals of the N-c
/// nonzero combinatorial Laplacian eigenvalues. Zero modes are excluded by
/// component count, so the value stays finite on disconnected graphs; a
/// fully edgeless graph (no nonzero eigenvalues at all) reports +inf.
inline double effective_graph_resistance(const Graph& g) {
  const int n = g.node_count();
  if (n < 2) throw std::invalid_argument("metric undefined below 2 nodes");
  const LaplacianSpectrum s = laplacian_spectrum(g, LaplacianKind::combinatorial);
  if (s.component_count == n) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int i = s.component_count; i < n; ++i)
    sum += 1.0 / s.eigenvalues[static_cast<std::size_t>(i)];
  return 2.0 / (n - 1) * sum;
}

/// Weighted spectrum: sum of (1 - lambda)^n over all eigenvalues of the
/// normalized Laplacian, zero modes included. n = 4 targets connectivity
/// (proportional to disjoint-path counts).
inline double weighted_spectrum(const Graph& g, int n = 4) {
  if (n < 1) throw std::invalid_argument("weighted_spectrum: power must be positive");
  const LaplacianSpectrum s = laplacian_spectrum(g, LaplacianKind::normalized);
  double sum = 0.0;
  for (double lambda : s.eigenvalues) sum += std::pow(1.0 - lambda, n);
  return sum;
}

inline double metric_value(const Graph& g, Metric m) {
  return m == Metric::egr ? effective_graph_resistance(g) : weighted_spectrum(g, 4);
}

}  // namespace critgraph
