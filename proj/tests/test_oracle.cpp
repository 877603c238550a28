#include "critgraph/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace critgraph;

namespace {

const CriticalityEntry& entry_for(const CriticalityTable& t, int element) {
  for (const auto& e : t.entries)
    if (e.element == element) return e;
  throw std::logic_error("element not in table");
}

bool ranks_are_permutation(const CriticalityTable& t) {
  std::vector<int> ranks;
  for (const auto& e : t.entries) ranks.push_back(e.rank);
  std::sort(ranks.begin(), ranks.end());
  for (std::size_t i = 0; i < ranks.size(); ++i)
    if (ranks[i] != static_cast<int>(i) + 1) return false;
  return true;
}

}  // namespace

TEST(Oracle, StarCenterMostCritical) {
  const auto t = score_all(tg::star(5), ElementKind::node, Metric::egr);
  ASSERT_EQ(t.entries.size(), 5u);
  EXPECT_EQ(entry_for(t, 0).rank, 1);
  EXPECT_TRUE(std::isinf(entry_for(t, 0).raw_score));  // removal leaves an edgeless graph
  EXPECT_TRUE(ranks_are_permutation(t));
}

TEST(Oracle, BridgeLinkMostCritical) {
  const tg::Graph g = tg::two_triangles_bridge();
  const auto t = score_all(g, ElementKind::link, Metric::egr);
  ASSERT_EQ(t.entries.size(), 7u);
  const auto edges = g.edges();
  int bridge_index = -1;
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (edges[i] == Edge{2, 3}) bridge_index = static_cast<int>(i);
  ASSERT_GE(bridge_index, 0);
  EXPECT_EQ(entry_for(t, bridge_index).rank, 1);
  EXPECT_TRUE(ranks_are_permutation(t));
}

TEST(Oracle, VertexTransitiveGraphsTieEverywhere) {
  for (const auto& g : {tg::cycle(4), tg::cycle(5), tg::complete(4), tg::complete(6)}) {
    const auto t = score_all(g, ElementKind::node, Metric::egr);
    for (const auto& e : t.entries)
      EXPECT_NEAR(e.raw_score, t.entries[0].raw_score, 1e-9);
    // ties resolve by ascending element id
    for (std::size_t i = 0; i < t.entries.size(); ++i)
      EXPECT_EQ(t.entries[i].rank, static_cast<int>(i) + 1);
  }
}

TEST(Oracle, Preconditions) {
  EXPECT_THROW(score_all(tg::complete(2), ElementKind::node, Metric::egr),
               std::invalid_argument);
  EXPECT_THROW(score_all(tg::Graph(5), ElementKind::link, Metric::egr), std::invalid_argument);
}

TEST(Oracle, Deterministic) {
  const tg::Graph g = tg::random_connected_graph(20, 15, 7);
  const auto a = score_all(g, ElementKind::link, Metric::egr);
  const auto b = score_all(g, ElementKind::link, Metric::egr, 2);  // parallel run

  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].element, b.entries[i].element);
    EXPECT_EQ(a.entries[i].raw_score, b.entries[i].raw_score);
    EXPECT_EQ(a.entries[i].rank, b.entries[i].rank);
  }
}

TEST(Oracle, LinkScoresNonNegativeAndFiniteOnConnectedGraphs) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const tg::Graph g = tg::random_connected_graph(10 + static_cast<int>(seed), 8, seed);
    const auto t = score_all(g, ElementKind::link, Metric::egr);
    for (const auto& e : t.entries) {
      EXPECT_GE(e.raw_score, -1e-9);
      EXPECT_FALSE(std::isinf(e.raw_score)) << "no +inf for link removal when N >= 3";
    }
  }
}

TEST(Oracle, PermutationEquivariant) {
  const tg::Graph g = tg::random_connected_graph(14, 10, 3);
  const auto perm = tg::random_permutation(14, 99);
  const tg::Graph h = tg::permute_graph(g, perm);
  const auto tg_ = score_all(g, ElementKind::node, Metric::egr);
  const auto th = score_all(h, ElementKind::node, Metric::egr);
  for (const auto& e : tg_.entries) {
    const auto& mapped = entry_for(th, perm[static_cast<std::size_t>(e.element)]);
    EXPECT_NEAR(mapped.raw_score, e.raw_score, 1e-9);
  }
}

TEST(Oracle, SubsetScoringRanksWithinSubset) {
  const tg::Graph g = tg::star(6);
  const auto t = score_elements(g, ElementKind::node, Metric::egr, {0, 2, 4});
  ASSERT_EQ(t.entries.size(), 3u);
  EXPECT_TRUE(ranks_are_permutation(t));
  EXPECT_EQ(entry_for(t, 0).rank, 1);
  EXPECT_THROW(score_elements(g, ElementKind::node, Metric::egr, {17}), std::invalid_argument);
}

TEST(TopPercent, CeilSelection) {
  CriticalityTable t;
  t.kind = ElementKind::node;
  auto fill = [&](int n) {
    t.entries.clear();
    for (int i = 0; i < n; ++i)
      t.entries.push_back({i, static_cast<double>(n - i), i + 1});  // rank i+1
  };
  fill(20);
  auto top = top_percent(t, 5.0);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0], 0);  // the rank-1 entry

  fill(10);
  EXPECT_EQ(top_percent(t, 100.0).size(), 10u);

  fill(1000);
  EXPECT_EQ(top_percent(t, 5.0).size(), 50u);

  EXPECT_THROW(top_percent(t, 0.0), std::invalid_argument);
  EXPECT_THROW(top_percent(t, 100.5), std::invalid_argument);
  t.entries.clear();
  EXPECT_THROW(top_percent(t, 5.0), std::invalid_argument);
}

TEST(Oracle, WeightedSpectrumKindWorksToo) {
  const auto t = score_all(tg::two_triangles_bridge(), ElementKind::node, Metric::ws4);
  EXPECT_EQ(t.entries.size(), 6u);
  EXPECT_TRUE(ranks_are_permutation(t));
  for (const auto& e : t.entries) EXPECT_TRUE(std::isfinite(e.raw_score));
}
