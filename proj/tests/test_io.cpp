#include "critgraph/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <unistd.h>

#include "test_support.hpp"

using namespace critgraph;

namespace {

std::string temp_dir() {
  static int counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("critgraph_io_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::create_directories(dir);
  return dir.string();
}

GnnModel sample_model(ElementKind kind = ElementKind::node) {
  GnnHyperparams h;
  h.embedding_dims = {6, 5};
  h.regression_dims = {4, 1};
  h.input_feature_dim = 3;
  h.kind = kind;
  GnnModel m = init_model(h, Metric::ws4, "plc", 99);
  m.training_seed = 1234;
  m.corpus_digest = "deadbeef00000000";
  return m;
}

}  // namespace

TEST(EdgeList, ParsesSimplePath) {
  const auto r = parse_edge_list("0 1\n1 2\n");
  EXPECT_EQ(r.graph.node_count(), 3);
  EXPECT_EQ(r.graph.edge_count(), 2);
  EXPECT_TRUE(r.graph.has_edge(0, 1));
  EXPECT_TRUE(r.graph.has_edge(1, 2));
  EXPECT_EQ(r.report.self_loops_removed, 0);
  EXPECT_EQ(r.report.duplicates_merged, 0);
}

TEST(EdgeList, MergesDuplicatesAndDropsSelfLoops) {
  const auto r = parse_edge_list("0 1\n1 0\n# c\n2 2\n");
  EXPECT_EQ(r.graph.edge_count(), 1);
  EXPECT_EQ(r.report.duplicates_merged, 1);
  EXPECT_EQ(r.report.self_loops_removed, 1);
  EXPECT_EQ(r.graph.node_count(), 3);
}

TEST(EdgeList, CompactsIdsAscending) {
  const auto r = parse_edge_list("7 9\n9 12\n");
  EXPECT_EQ(r.graph.node_count(), 3);
  EXPECT_TRUE(r.graph.has_edge(0, 1));
  EXPECT_TRUE(r.graph.has_edge(1, 2));
  ASSERT_EQ(r.report.original_ids.size(), 3u);
  EXPECT_EQ(r.report.original_ids[0], 7);
  EXPECT_EQ(r.report.original_ids[1], 9);
  EXPECT_EQ(r.report.original_ids[2], 12);
}

TEST(EdgeList, ErrorsCarryLineNumbers) {
  try {
    parse_edge_list("0 1\nfoo bar\n");
    FAIL() << "expected io_error";
  } catch (const io_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_edge_list("0 1 2\n"), io_error);
  EXPECT_THROW(parse_edge_list(""), io_error);
  EXPECT_THROW(parse_edge_list("# only comments\n"), io_error);
  EXPECT_THROW(parse_edge_list("-1 2\n"), io_error);
}

TEST(EdgeList, RoundTripIsIdentityIncludingIsolatedNodes) {
  tg::Graph g(7);  // node 6 isolated
  g.add_edge(0, 5);
  g.add_edge(1, 2);
  g.add_edge(2, 5);
  const auto back = parse_edge_list(render_edge_list(g));
  EXPECT_EQ(back.graph, g);
  EXPECT_EQ(parse_edge_list(render_edge_list(back.graph)).graph, back.graph);
}

TEST(EdgeList, DirectiveBoundsChecked) {
  EXPECT_THROW(parse_edge_list("# critgraph nodes=2\n0 5\n"), io_error);
  const auto r = parse_edge_list("# critgraph nodes=4\n0 1\n");
  EXPECT_EQ(r.graph.node_count(), 4);
}

TEST(TableCsv, RoundTripWithSentinel) {
  CriticalityTable t;
  t.kind = ElementKind::node;
  t.metric = Metric::egr;
  t.entries = {{0, 0.12345678901234567, 2},
               {1, std::numeric_limits<double>::infinity(), 1},
               {2, 3.0e-17, 3}};
  const auto back = parse_table(render_table(t), ElementKind::node, Metric::egr);
  ASSERT_EQ(back.entries.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.entries[i].element, t.entries[i].element);
    EXPECT_EQ(back.entries[i].raw_score, t.entries[i].raw_score);  // bit-exact
    EXPECT_EQ(back.entries[i].rank, t.entries[i].rank);
  }
  EXPECT_THROW(parse_table("nope\n1,2,3\n", ElementKind::node, Metric::egr), io_error);
  EXPECT_THROW(parse_table("element_id,raw_score,rank\n", ElementKind::node, Metric::egr),
               io_error);
}

TEST(ModelDocument, RoundTripBitExact) {
  const GnnModel m = sample_model();
  const GnnModel back = parse_model(render_model(m));
  EXPECT_EQ(back, m);  // parameter-for-parameter, provenance included
}

TEST(ModelDocument, VersionMismatchRejected) {
  auto doc = nlohmann::json::parse(render_model(sample_model()));
  doc["format_version"] = kModelFormatVersion + 1;
  try {
    parse_model(doc.dump());
    FAIL() << "expected io_error";
  } catch (const io_error& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
}

TEST(ModelDocument, TruncatedAndCorruptInputsNamed) {
  const std::string text = render_model(sample_model());
  EXPECT_THROW(parse_model(text.substr(0, text.size() / 2)), io_error);

  auto doc = nlohmann::json::parse(text);
  auto& tensors = doc["tensors"];
  std::string dropped = tensors[0]["name"].get<std::string>();
  tensors.erase(0);
  try {
    parse_model(doc.dump());
    FAIL() << "expected io_error";
  } catch (const io_error& e) {
    EXPECT_NE(std::string(e.what()).find(dropped), std::string::npos);
  }

  auto doc2 = nlohmann::json::parse(text);
  doc2["tensors"][1]["shape"] = {1, 1};
  EXPECT_THROW(parse_model(doc2.dump()), io_error);

  auto doc3 = nlohmann::json::parse(text);
  doc3["tensors"][2]["values"][0] = "not-a-number";
  EXPECT_THROW(parse_model(doc3.dump()), io_error);
}

TEST(ModelDocument, FileRoundTrip) {
  const std::string dir = temp_dir();
  const GnnModel m = sample_model(ElementKind::link);
  const std::string path = dir + "/model.json";
  save_model(m, path);
  EXPECT_EQ(load_model(path), m);
  EXPECT_THROW(load_model(dir + "/does_not_exist.json"), io_error);
}

TEST(Corpus, DirectoryRoundTrip) {
  TrainingCorpus corpus = make_corpus(2, 12, 18, GraphFamily::power_law, ElementKind::node,
                                      Metric::egr, 31);
  corpus.entries[0].mask = {0, 3, 5};
  const std::string dir = temp_dir();
  save_corpus(corpus, dir);
  const TrainingCorpus back = load_corpus(dir);
  ASSERT_EQ(back.entries.size(), corpus.entries.size());
  EXPECT_EQ(back.kind, corpus.kind);
  EXPECT_EQ(back.metric, corpus.metric);
  EXPECT_EQ(back.family, corpus.family);
  EXPECT_EQ(back.seed, corpus.seed);
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].graph, corpus.entries[i].graph);
    EXPECT_EQ(back.entries[i].mask, corpus.entries[i].mask);
    ASSERT_EQ(back.entries[i].truth.entries.size(), corpus.entries[i].truth.entries.size());
    for (std::size_t j = 0; j < corpus.entries[i].truth.entries.size(); ++j) {
      EXPECT_EQ(back.entries[i].truth.entries[j].raw_score,
                corpus.entries[i].truth.entries[j].raw_score);
      EXPECT_EQ(back.entries[i].truth.entries[j].rank, corpus.entries[i].truth.entries[j].rank);
    }
  }
  EXPECT_EQ(corpus_digest(back), corpus_digest(corpus));
}

TEST(Corpus, DigestTracksContent) {
  TrainingCorpus a = make_corpus(1, 12, 12, GraphFamily::power_law, ElementKind::node,
                                 Metric::egr, 1);
  TrainingCorpus b = make_corpus(1, 12, 12, GraphFamily::power_law, ElementKind::node,
                                 Metric::egr, 2);
  EXPECT_NE(corpus_digest(a), corpus_digest(b));
  EXPECT_EQ(corpus_digest(a), corpus_digest(a));
}

TEST(TrainConfigDocument, DefaultsAndOverrides) {
  const std::string dir = temp_dir();
  const std::string path = dir + "/config.json";
  detail::write_file(path, R"({"epochs": 7, "learning_rate": 0.005,
    "hyperparams": {"embedding_dims": [8, 4], "input_feature_dim": 4}})");
  const auto [cfg, hyper] = load_train_config(path);
  EXPECT_EQ(cfg.epochs, 7);
  EXPECT_DOUBLE_EQ(cfg.learning_rate, 0.005);
  EXPECT_EQ(cfg.early_stop_patience, 10);  // default preserved
  EXPECT_EQ(hyper.embedding_dims, (std::vector<int>{8, 4}));
  EXPECT_EQ(hyper.input_feature_dim, 4);
  EXPECT_EQ(hyper.regression_dims, (std::vector<int>{12, 8, 1}));  // default preserved
  detail::write_file(path, "{not json");
  EXPECT_THROW(load_train_config(path), io_error);
}

TEST(ReportCsv, OptionalFieldsRenderEmpty) {
  EvalReport r;
  r.graph_id = "g.txt";
  r.model_id = "m.json";
  r.kind = ElementKind::node;
  r.metric = Metric::egr;
  r.top_pct = 5.0;
  r.predict_seconds = 0.25;
  const std::string row = render_report_row(r);
  EXPECT_EQ(row, "g.txt,m.json,node,egr,5,,,0.25,\n");
  r.top_accuracy = 0.5;
  r.pairwise_accuracy = 0.75;
  r.oracle_seconds = 12.5;
  EXPECT_EQ(render_report_row(r), "g.txt,m.json,node,egr,5,0.5,0.75,0.25,12.5\n");
}

TEST(TrainLog, LineOrientedRecords) {
  const std::vector<EpochRecord> log{{1, 0.5, 0.75}, {2, 0.25, 0.875}};
  const std::string text = render_train_log(log);
  EXPECT_EQ(text, "epoch,mean_loss,val_accuracy\n1,0.5,0.75\n2,0.25,0.875\n");
}
