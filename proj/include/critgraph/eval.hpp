#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "critgraph/model.hpp"
#include "critgraph/oracle.hpp"
#include "critgraph/rng.hpp"

namespace critgraph {

struct EvalReport {
  std::string graph_id;
  std::string model_id;
  ElementKind kind = ElementKind::node;
  Metric metric = Metric::egr;
  double top_pct = 5.0;
  std::optional<double> top_accuracy;
  std::optional<double> pairwise_accuracy;
  double predict_seconds = 0.0;
  std::optional<double> oracle_seconds;
};

namespace detail {

inline void require_same_universe(const CriticalityTable& a, const CriticalityTable& b) {
  if (a.kind != b.kind || a.entries.size() != b.entries.size())
    throw std::invalid_argument("tables cover different element universes");
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    if (a.entries[i].element != b.entries[i].element)
      throw std::invalid_argument("tables cover different element universes");
}

}  // namespace detail

/// Overlap fraction between the two tables' top-pct element sets. The
/// denominator is the same ceil(len * pct/100) the selection rule uses, so
/// identical tables score exactly 1.
inline double top_n_accuracy(const CriticalityTable& predicted, const CriticalityTable& truth,
                             double pct) {
  detail::require_same_universe(predicted, truth);
  const std::vector<int> a = top_percent(predicted, pct);
  const std::vector<int> b = top_percent(truth, pct);
  std::vector<int> overlap;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(overlap));
  return static_cast<double>(overlap.size()) / static_cast<double>(a.size());
}

/// Fraction of sampled element pairs whose predicted order agrees with the
/// truth order; truth ties count as correct.
inline double pairwise_accuracy(const CriticalityTable& predicted, const CriticalityTable& truth,
                                int sample_pairs, std::uint64_t seed) {
  detail::require_same_universe(predicted, truth);
  const std::size_t n = truth.entries.size();
  if (n < 2) throw std::invalid_argument("pairwise_accuracy: need at least 2 elements");
  if (sample_pairs < 1) throw std::invalid_argument("pairwise_accuracy: need at least 1 pair");
  Rng rng(seed);
  int correct = 0;
  for (int s = 0; s < sample_pairs; ++s) {
    const auto i = rand_below(rng, n);
    auto j = rand_below(rng, n - 1);
    if (j >= i) ++j;
    const double ti = truth.entries[i].raw_score, tj = truth.entries[j].raw_score;
    if (ti == tj || detail::scores_tie(std::max(ti, tj), std::min(ti, tj))) {
      ++correct;
      continue;
    }
    const double pi = predicted.entries[i].raw_score, pj = predicted.entries[j].raw_score;
    if ((ti > tj && pi > pj) || (ti < tj && pi < pj)) ++correct;
  }
  return static_cast<double>(correct) / sample_pairs;
}

/// Time model prediction (embedding + scoring every element) and, when
/// requested, the conventional oracle on the same graph; fill accuracies
/// against the oracle table.
inline EvalReport benchmark(const Graph& g, const GnnModel& model, double pct, bool with_oracle,
                            int oracle_threads = 1, std::uint64_t seed = 0) {
  using clock = std::chrono::steady_clock;
  EvalReport report;
  report.kind = model.hyper.kind;
  report.metric = model.metric;
  report.top_pct = pct;

  const auto p0 = clock::now();
  const CriticalityTable predicted = predict_scores(g, model, seed);
  report.predict_seconds = std::chrono::duration<double>(clock::now() - p0).count();

  if (with_oracle) {
    const auto o0 = clock::now();
    const CriticalityTable truth = score_all(g, model.hyper.kind, model.metric, oracle_threads);
    report.oracle_seconds = std::chrono::duration<double>(clock::now() - o0).count();
    report.top_accuracy = top_n_accuracy(predicted, truth, pct);
    report.pairwise_accuracy = pairwise_accuracy(predicted, truth, 10000, derive_seed(seed, 0xacc));
  }
  return report;
}

}  // namespace critgraph
