#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "critgraph/generate.hpp"
#include "critgraph/oracle.hpp"
#include "critgraph/parallel.hpp"
#include "critgraph/rng.hpp"

namespace critgraph {

struct CorpusEntry {
  Graph graph;
  CriticalityTable truth;
  // Labeled element ids; empty means every element of the table. Partial
  // labeling is how a handful of oracle-scored elements fine-tunes a model.
  std::vector<int> mask;
};

struct TrainingCorpus {
  ElementKind kind = ElementKind::node;
  Metric metric = Metric::egr;
  GraphFamily family = GraphFamily::power_law;
  std::uint64_t seed = 0;
  std::vector<CorpusEntry> entries;
};

/// Generate `count` graphs with node counts uniform in [min_size, max_size],
/// ground-truth each with the exact oracle, and bundle the pairs.
/// Deterministic under seed; graphs are scored in parallel.
inline TrainingCorpus make_corpus(int count, int min_size, int max_size, GraphFamily family,
                                  ElementKind kind, Metric metric, std::uint64_t seed,
                                  int edges_per_node = 2, double triad_probability = 0.3,
                                  int threads = 0) {
  if (count < 1) throw std::invalid_argument("make_corpus: count must be >= 1");
  if (min_size < 10) throw std::invalid_argument("make_corpus: min size must be >= 10");
  if (max_size < min_size) throw std::invalid_argument("make_corpus: empty size range");
  TrainingCorpus corpus;
  corpus.kind = kind;
  corpus.metric = metric;
  corpus.family = family;
  corpus.seed = seed;
  corpus.entries.resize(static_cast<std::size_t>(count));
  Rng size_rng(derive_seed(seed, 1));
  std::vector<int> sizes(static_cast<std::size_t>(count));
  for (auto& s : sizes)
    s = min_size + static_cast<int>(rand_below(
                       size_rng, static_cast<std::uint64_t>(max_size - min_size + 1)));
  parallel_for(count, threads, [&](int i) {
    GeneratorSpec spec;
    spec.family = family;
    spec.node_count = sizes[static_cast<std::size_t>(i)];
    spec.edges_per_node = edges_per_node;
    spec.triad_probability = family == GraphFamily::power_law_cluster ? triad_probability : 0.0;
    spec.seed = derive_seed(seed, 2, static_cast<std::uint64_t>(i));
    CorpusEntry& entry = corpus.entries[static_cast<std::size_t>(i)];
    entry.graph = generate(spec);
    entry.truth = score_all(entry.graph, kind, metric, 1);
  });
  return corpus;
}

}  // namespace critgraph
