#include "critgraph/train.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"

using namespace critgraph;

namespace {

GnnHyperparams fd_hyper(ElementKind kind) {
  GnnHyperparams h;
  h.embedding_dims = {5, 4, 3};
  h.regression_dims = {3, 1};
  h.input_feature_dim = 3;
  h.kind = kind;
  return h;
}

// Corpus entry around one random graph with oracle truth.
TrainingCorpus tiny_corpus(ElementKind kind, int n_graphs, int nodes, std::uint64_t seed) {
  TrainingCorpus corpus;
  corpus.kind = kind;
  corpus.metric = Metric::egr;
  corpus.family = GraphFamily::power_law;
  corpus.seed = seed;
  for (int i = 0; i < n_graphs; ++i) {
    CorpusEntry entry;
    entry.graph = generate({GraphFamily::power_law, nodes, 2, 0.0, derive_seed(seed, i)});
    entry.truth = score_all(entry.graph, kind, Metric::egr);
    corpus.entries.push_back(std::move(entry));
  }
  return corpus;
}

std::vector<RankPair> random_batch(const TrainingCorpus& corpus, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<RankPair> batch;
  for (int s = 0; s < count; ++s) {
    const int gi = static_cast<int>(rand_below(rng, corpus.entries.size()));
    const auto norms = normalized_scores(corpus.entries[static_cast<std::size_t>(gi)].truth);
    const auto i = rand_below(rng, norms.size());
    auto j = rand_below(rng, norms.size() - 1);
    if (j >= i) ++j;
    batch.push_back({gi, static_cast<int>(i), static_cast<int>(j),
                     sigmoid(norms[i] - norms[j])});
  }
  return batch;
}

}  // namespace

TEST(RankingLoss, KnownValues) {
  // equal ranks, equal scores: symmetric cross entropy = log 2
  EXPECT_NEAR(ranking_loss(0.0, 0.0, 0.5, 0.5), std::log(2.0), 1e-12);
  // confident correct order drives the loss to zero
  EXPECT_NEAR(ranking_loss(40.0, 0.0, 30.0, 0.0), 0.0, 1e-10);
  // r_i=1, r_j=0, equal scores: both log terms share log(1/2)
  EXPECT_NEAR(ranking_loss(0.0, 0.0, 1.0, 0.0), std::log(2.0), 1e-12);
}

TEST(RankingLoss, BoundsAndClamping) {
  const double max_loss = -std::log(1e-12);
  for (double yhat : {-1000.0, -30.0, -1.0, 0.0, 1.0, 30.0, 1000.0})
    for (double r : {-5.0, 0.0, 5.0}) {
      const double loss = ranking_loss(yhat, 0.0, r, 0.0);
      EXPECT_GE(loss, 0.0);
      EXPECT_LE(loss, max_loss + 1e-9);
    }
}

TEST(RankingLoss, SwapAntisymmetry) {
  // Swapping (i, j) flips both label and score difference: identical loss.
  Rng rng(3);
  for (int s = 0; s < 100; ++s) {
    const double yi = rand_range(rng, -3, 3), yj = rand_range(rng, -3, 3);
    const double ri = rand_range(rng, 0, 1), rj = rand_range(rng, 0, 1);
    EXPECT_NEAR(ranking_loss(yi, yj, ri, rj), ranking_loss(yj, yi, rj, ri), 1e-12);
  }
}

TEST(NormalizedScores, MinMaxWithSentinel) {
  CriticalityTable t;
  t.entries = {{0, 2.0, 0}, {1, 6.0, 0}, {2, 4.0, 0},
               {3, std::numeric_limits<double>::infinity(), 0}};
  const auto norm = normalized_scores(t);
  EXPECT_DOUBLE_EQ(norm[0], 0.0);
  EXPECT_DOUBLE_EQ(norm[1], 1.0);
  EXPECT_DOUBLE_EQ(norm[2], 0.5);
  EXPECT_DOUBLE_EQ(norm[3], 1.0);  // sentinel pins to the top

  t.entries = {{0, 3.0, 0}, {1, 3.0, 0}};
  const auto flat = normalized_scores(t);
  EXPECT_DOUBLE_EQ(flat[0], flat[1]);
}

// The shared final bias cancels in every score difference, so its gradient
// is identically zero; with symmetric labels everything else is stationary
// too at y_i == y_j.
TEST(Gradients, FinalBiasZeroAtSymmetricPoint) {
  const auto corpus = tiny_corpus(ElementKind::node, 1, 12, 5);
  const GnnModel model = init_model(fd_hyper(ElementKind::node), Metric::egr, "pl", 2);
  std::vector<RankPair> batch;
  for (int i = 0; i + 1 < 6; ++i) batch.push_back({0, i, i + 1, 0.5});
  const auto lg = loss_and_gradients(model, corpus, batch, 0);
  EXPECT_DOUBLE_EQ(lg.gradients.reg_bias.back()[0], 0.0);
}

TEST(Gradients, DuplicatedPairAveragesOut) {
  const auto corpus = tiny_corpus(ElementKind::node, 1, 12, 6);
  const GnnModel model = init_model(fd_hyper(ElementKind::node), Metric::egr, "pl", 3);
  const std::vector<RankPair> one{{0, 1, 4, 0.8}};
  const std::vector<RankPair> two{{0, 1, 4, 0.8}, {0, 1, 4, 0.8}};
  const auto g1 = loss_and_gradients(model, corpus, one, 0);
  const auto g2 = loss_and_gradients(model, corpus, two, 0);
  EXPECT_NEAR(g1.loss, g2.loss, 1e-15);
  const auto s1 = detail::tensor_slots(g1.gradients);
  const auto s2 = detail::tensor_slots(g2.gradients);
  for (std::size_t s = 0; s < s1.size(); ++s)
    for (std::size_t i = 0; i < s1[s].second; ++i)
      EXPECT_NEAR(s1[s].first[i], s2[s].first[i], 1e-12);
}

// Central finite differences over every parameter coordinate.
TEST(Gradients, MatchFiniteDifferencesEverywhere) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ElementKind kind = seed % 2 == 0 ? ElementKind::link : ElementKind::node;
    const auto corpus = tiny_corpus(kind, 2, 10, derive_seed(seed, 10));
    GnnModel model = init_model(fd_hyper(kind), Metric::egr, "pl", derive_seed(seed, 20));
    const auto batch = random_batch(corpus, 8, derive_seed(seed, 30));
    const std::uint64_t sample_seed = derive_seed(seed, 40);
    const auto analytic = loss_and_gradients(model, corpus, batch, sample_seed);

    auto loss_at = [&]() {
      return loss_and_gradients(model, corpus, batch, sample_seed).loss;
    };
    auto params = detail::tensor_slots(model);
    const auto grads = detail::tensor_slots(analytic.gradients);
    const double h = 1e-5;
    int checked = 0;
    for (std::size_t s = 0; s < params.size(); ++s) {
      for (std::size_t i = 0; i < params[s].second; ++i) {
        double& p = params[s].first[i];
        const double saved = p;
        p = saved + h;
        const double up = loss_at();
        p = saved - h;
        const double down = loss_at();
        p = saved;
        const double fd = (up - down) / (2.0 * h);
        const double an = grads[s].first[i];
        const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6});
        ASSERT_LT(rel, 1e-4) << "seed " << seed << " tensor " << s << " coord " << i
                             << " analytic " << an << " fd " << fd;
        ++checked;
      }
    }
    EXPECT_GT(checked, 100);
  }
}

TEST(Train, LearnsTinyCorpus) {
  TrainingCorpus corpus;
  corpus.kind = ElementKind::node;
  corpus.metric = Metric::egr;
  corpus.family = GraphFamily::power_law;
  Rng size_rng(99);
  for (int i = 0; i < 5; ++i) {
    CorpusEntry entry;
    const int n = 30 + static_cast<int>(rand_below(size_rng, 21));
    entry.graph = generate({GraphFamily::power_law, n, 2, 0.0, derive_seed(77, i)});
    entry.truth = score_all(entry.graph, ElementKind::node, Metric::egr, 2);
    corpus.entries.push_back(std::move(entry));
  }
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.seed = 5;
  cfg.early_stop_patience = 30;
  cfg.learning_rate = 3e-3;
  const auto result = train(corpus, GnnHyperparams{}, cfg);
  ASSERT_FALSE(result.log.empty());
  // training-set ordering accuracy after training
  double acc = 0.0;
  for (std::size_t gi = 0; gi < corpus.entries.size(); ++gi) {
    const auto& entry = corpus.entries[gi];
    std::vector<int> positions(entry.truth.entries.size());
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i);
    const auto scores = detail::entry_model_scores(entry, corpus.kind, result.model, 0);
    acc += detail::ordering_accuracy(entry, positions, scores, 4000, 9);
  }
  acc /= static_cast<double>(corpus.entries.size());
  EXPECT_GE(acc, 0.85);
}

TEST(Train, DeterministicUnderSeed) {
  const auto corpus = tiny_corpus(ElementKind::node, 3, 20, 15);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 21;
  const auto a = train(corpus, fd_hyper(ElementKind::node), cfg);
  const auto b = train(corpus, fd_hyper(ElementKind::node), cfg);
  EXPECT_EQ(a.model, b.model);
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].mean_loss, b.log[i].mean_loss);
    EXPECT_EQ(a.log[i].val_accuracy, b.log[i].val_accuracy);
  }
}

TEST(Train, RejectsBadConfigs) {
  const auto corpus = tiny_corpus(ElementKind::node, 1, 12, 1);
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(train(corpus, fd_hyper(ElementKind::node), cfg), std::invalid_argument);
  cfg.epochs = 1;
  EXPECT_THROW(train(TrainingCorpus{}, fd_hyper(ElementKind::node), cfg),
               std::invalid_argument);
}

TEST(FineTune, ZeroPatienceReturnsBase) {
  const auto corpus = tiny_corpus(ElementKind::node, 2, 15, 33);
  const GnnModel base = init_model(fd_hyper(ElementKind::node), Metric::egr, "pl", 1);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.early_stop_patience = 0;
  const auto result = fine_tune(base, corpus, cfg);
  EXPECT_EQ(result.model, base);
}

TEST(FineTune, OwnCorpusDoesNotDegrade) {
  const auto corpus = tiny_corpus(ElementKind::node, 4, 25, 55);
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.seed = 3;
  const auto first = train(corpus, fd_hyper(ElementKind::node), cfg);
  TrainConfig tune_cfg = cfg;
  tune_cfg.epochs = 6;
  tune_cfg.seed = 4;
  const auto tuned = fine_tune(first.model, corpus, tune_cfg);
  // best-snapshot early stopping cannot lose more than noise
  EXPECT_GE(tuned.best_val_accuracy, first.best_val_accuracy - 0.02);
}

TEST(FineTune, RejectsKindMismatch) {
  const auto corpus = tiny_corpus(ElementKind::node, 1, 12, 8);
  const GnnModel base = init_model(fd_hyper(ElementKind::link), Metric::egr, "pl", 1);
  TrainConfig cfg;
  EXPECT_THROW(fine_tune(base, corpus, cfg), std::invalid_argument);
}

TEST(Train, MaskedCorpusTrainsOnSubset) {
  auto corpus = tiny_corpus(ElementKind::node, 2, 20, 91);
  corpus.entries[0].mask = {0, 2, 4, 6, 8, 10};
  corpus.entries[1].mask = {1, 3, 5, 7, 9};
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 7;
  const auto result = train(corpus, fd_hyper(ElementKind::node), cfg);
  EXPECT_FALSE(result.log.empty());
}
