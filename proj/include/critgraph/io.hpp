#pragma once

#include <cctype>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "critgraph/corpus.hpp"
#include "critgraph/errors.hpp"
#include "critgraph/eval.hpp"
#include "critgraph/graph.hpp"
#include "critgraph/model.hpp"
#include "critgraph/train.hpp"

// File formats: whitespace edge lists for graphs, CSV for tables and
// reports, JSON for models, corpora manifests and train configs. All float
// rendering round-trips binary64 exactly.

namespace critgraph {

constexpr int kModelFormatVersion = 1;
constexpr int kCorpusFormatVersion = 1;

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + path);
  out << content;
  if (!out) throw io_error("write failed for " + path);
}

// Shortest-exact decimal rendering of a double ("%.17g" round-trips; "inf"
// for the disconnection sentinel).
inline std::string render_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& token, const std::string& context) {
  if (token == "inf") return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || token.empty())
    throw io_error(context + ": bad number '" + token + "'");
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Edge lists

struct IngestReport {
  int self_loops_removed = 0;
  int duplicates_merged = 0;
  // original id of each compacted node id; empty when ids were taken as-is
  std::vector<long long> original_ids;
};

struct IngestResult {
  Graph graph;
  IngestReport report;
};

/// Parse a whitespace edge list: one "u v" pair per line, '#' comments,
/// blank lines ignored. Directed duplicates are merged (symmetrization) and
/// self-loops dropped, both counted. Ids are compacted to 0..N-1 in
/// ascending order with the mapping reported, unless a
/// "# critgraph nodes=N" directive declares the id universe (the writer
/// emits one so isolated nodes survive a round trip).
inline IngestResult parse_edge_list(const std::string& text) {
  IngestResult out;
  long long declared_nodes = -1;
  std::vector<std::pair<long long, long long>> raw_edges;
  int line_number = 0;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      long long n = -1;
      if (std::sscanf(line.c_str() + first, "# critgraph nodes=%lld", &n) == 1 && n >= 0)
        declared_nodes = n;
      continue;
    }
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a >> b) || (fields >> extra))
      throw io_error("line " + std::to_string(line_number) + ": expected two node ids");
    auto parse_id = [&](const std::string& token) {
      for (char c : token)
        if (!std::isdigit(static_cast<unsigned char>(c)))
          throw io_error("line " + std::to_string(line_number) + ": bad node id '" + token + "'");
      errno = 0;
      const long long v = std::strtoll(token.c_str(), nullptr, 10);
      if (errno != 0)
        throw io_error("line " + std::to_string(line_number) + ": node id out of range");
      return v;
    };
    raw_edges.emplace_back(parse_id(a), parse_id(b));
  }
  if (raw_edges.empty() && declared_nodes < 0) throw io_error("empty edge list");

  std::map<long long, NodeId> remap;
  if (declared_nodes >= 0) {
    for (const auto& [u, v] : raw_edges)
      if (u >= declared_nodes || v >= declared_nodes)
        throw io_error("edge id exceeds declared node count " + std::to_string(declared_nodes));
    out.graph = Graph(static_cast<int>(declared_nodes));
  } else {
    for (const auto& [u, v] : raw_edges) {
      remap.emplace(u, 0);
      remap.emplace(v, 0);
    }
    NodeId next = 0;
    for (auto& [orig, compact] : remap) {
      compact = next++;
      out.report.original_ids.push_back(orig);
    }
    out.graph = Graph(next);
  }
  auto to_id = [&](long long orig) {
    return declared_nodes >= 0 ? static_cast<NodeId>(orig) : remap.at(orig);
  };
  for (const auto& [u, v] : raw_edges) {
    if (u == v) {
      ++out.report.self_loops_removed;
      continue;
    }
    const NodeId a = to_id(u), b = to_id(v);
    if (out.graph.has_edge(a, b)) {
      ++out.report.duplicates_merged;
      continue;
    }
    out.graph.add_edge(a, b);
  }
  return out;
}

inline std::string render_edge_list(const Graph& g) {
  std::string text = "# critgraph nodes=" + std::to_string(g.node_count()) + "\n";
  for (const auto& [u, v] : g.edges())
    text += std::to_string(u) + " " + std::to_string(v) + "\n";
  return text;
}

inline IngestResult load_graph(const std::string& path) {
  try {
    return parse_edge_list(detail::read_file(path));
  } catch (const io_error& e) {
    throw io_error(path + ": " + e.what());
  }
}

inline void save_graph(const Graph& g, const std::string& path) {
  detail::write_file(path, render_edge_list(g));
}

// ---------------------------------------------------------------------------
// Criticality tables (CSV)

inline std::string render_table(const CriticalityTable& t) {
  std::string csv = "element_id,raw_score,rank\n";
  for (const auto& e : t.entries)
    csv += std::to_string(e.element) + "," + detail::render_double(e.raw_score) + "," +
           std::to_string(e.rank) + "\n";
  return csv;
}

inline CriticalityTable parse_table(const std::string& text, ElementKind kind, Metric metric) {
  CriticalityTable t;
  t.kind = kind;
  t.metric = metric;
  std::istringstream lines(text);
  std::string line;
  if (!std::getline(lines, line) || line.rfind("element_id,raw_score,rank", 0) != 0)
    throw io_error("table: missing element_id,raw_score,rank header");
  int line_number = 1;
  while (std::getline(lines, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string id_s, raw_s, rank_s;
    if (!std::getline(fields, id_s, ',') || !std::getline(fields, raw_s, ',') ||
        !std::getline(fields, rank_s))
      throw io_error("table line " + std::to_string(line_number) + ": expected 3 columns");
    CriticalityEntry e;
    e.element = static_cast<int>(
        detail::parse_double(id_s, "table line " + std::to_string(line_number)));
    e.raw_score = detail::parse_double(raw_s, "table line " + std::to_string(line_number));
    e.rank = static_cast<int>(
        detail::parse_double(rank_s, "table line " + std::to_string(line_number)));
    t.entries.push_back(e);
  }
  if (t.entries.empty()) throw io_error("table: no rows");
  std::sort(t.entries.begin(), t.entries.end(),
            [](const auto& a, const auto& b) { return a.element < b.element; });
  return t;
}

inline void save_table(const CriticalityTable& t, const std::string& path) {
  detail::write_file(path, render_table(t));
}

inline CriticalityTable load_table(const std::string& path, ElementKind kind, Metric metric) {
  try {
    return parse_table(detail::read_file(path), kind, metric);
  } catch (const io_error& e) {
    throw io_error(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Models (JSON)

namespace detail {

inline nlohmann::json hyper_to_json(const GnnHyperparams& h) {
  return {{"embedding_dims", h.embedding_dims},
          {"regression_dims", h.regression_dims},
          {"input_feature_dim", h.input_feature_dim},
          {"neighbor_sample_cap", h.neighbor_sample_cap},
          {"degree_feature", h.degree_feature == DegreeFeature::normalized ? "normalized" : "raw"},
          {"kind", kind_name(h.kind)}};
}

inline GnnHyperparams hyper_from_json(const nlohmann::json& j) {
  GnnHyperparams h;
  h.embedding_dims = j.at("embedding_dims").get<std::vector<int>>();
  h.regression_dims = j.at("regression_dims").get<std::vector<int>>();
  h.input_feature_dim = j.at("input_feature_dim").get<int>();
  h.neighbor_sample_cap = j.at("neighbor_sample_cap").get<int>();
  const std::string mode = j.at("degree_feature").get<std::string>();
  if (mode != "normalized" && mode != "raw")
    throw io_error("model: unknown degree_feature '" + mode + "'");
  h.degree_feature = mode == "raw" ? DegreeFeature::raw : DegreeFeature::normalized;
  h.kind = kind_from_name(j.at("kind").get<std::string>());
  h.validate();
  return h;
}

}  // namespace detail

inline std::string render_model(const GnnModel& model) {
  nlohmann::json doc;
  doc["format"] = "critgraph-model";
  doc["format_version"] = kModelFormatVersion;
  doc["hyperparams"] = detail::hyper_to_json(model.hyper);
  doc["metric"] = metric_name(model.metric);
  doc["provenance"] = {{"family", model.family_tag},
                       {"training_seed", model.training_seed},
                       {"corpus_digest", model.corpus_digest}};
  nlohmann::json tensors = nlohmann::json::array();
  visit_tensors(model, [&](const std::string& name, const std::vector<int>& shape,
                           const double* data, std::size_t len) {
    nlohmann::json t;
    t["name"] = name;
    t["shape"] = shape;
    t["values"] = std::vector<double>(data, data + len);
    tensors.push_back(std::move(t));
  });
  doc["tensors"] = std::move(tensors);
  return doc.dump(1);
}

inline GnnModel parse_model(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("model: not a valid document (") + e.what() + ")");
  }
  try {
    if (doc.value("format", "") != "critgraph-model")
      throw io_error("model: not a critgraph model document");
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw io_error("model: format version " + std::to_string(version) +
                     " not supported (expected " + std::to_string(kModelFormatVersion) + ")");
    GnnModel model = zero_model(detail::hyper_from_json(doc.at("hyperparams")),
                                metric_from_name(doc.at("metric").get<std::string>()));
    const auto& prov = doc.at("provenance");
    model.family_tag = prov.at("family").get<std::string>();
    model.training_seed = prov.at("training_seed").get<std::uint64_t>();
    model.corpus_digest = prov.at("corpus_digest").get<std::string>();

    std::map<std::string, const nlohmann::json*> by_name;
    for (const auto& t : doc.at("tensors")) by_name[t.at("name").get<std::string>()] = &t;
    visit_tensors(model, [&](const std::string& name, const std::vector<int>& shape,
                             double* data, std::size_t len) {
      const auto it = by_name.find(name);
      if (it == by_name.end()) throw io_error("model: missing tensor " + name);
      const auto& t = *it->second;
      if (t.at("shape").get<std::vector<int>>() != shape)
        throw io_error("model: tensor " + name + " has wrong shape");
      const auto values = t.at("values").get<std::vector<double>>();
      if (values.size() != len) throw io_error("model: tensor " + name + " has wrong length");
      for (std::size_t i = 0; i < len; ++i) {
        if (!std::isfinite(values[i]))
          throw io_error("model: tensor " + name + " has non-finite values");
        data[i] = values[i];
      }
      by_name.erase(it);
    });
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("model: malformed document (") + e.what() + ")");
  }
}

inline void save_model(const GnnModel& model, const std::string& path) {
  detail::write_file(path, render_model(model));
}

inline GnnModel load_model(const std::string& path) {
  try {
    return parse_model(detail::read_file(path));
  } catch (const io_error& e) {
    throw io_error(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Corpora (directory with manifest)

inline std::string corpus_digest(const TrainingCorpus& corpus) {
  // FNV-1a over a canonical byte rendering of graphs and ground truth.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  feed(static_cast<std::uint64_t>(corpus.entries.size()));
  for (const auto& entry : corpus.entries) {
    feed(static_cast<std::uint64_t>(entry.graph.node_count()));
    for (const auto& [u, v] : entry.graph.edges())
      feed((static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v));
    for (const auto& e : entry.truth.entries) {
      feed(static_cast<std::uint64_t>(e.element));
      std::uint64_t bits;
      const double raw = e.raw_score;
      static_assert(sizeof bits == sizeof raw);
      std::memcpy(&bits, &raw, sizeof bits);
      feed(bits);
      feed(static_cast<std::uint64_t>(e.rank));
    }
    for (int m : entry.mask) feed(static_cast<std::uint64_t>(m));
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

inline void save_corpus(const TrainingCorpus& corpus, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create directory " + dir);
  nlohmann::json manifest;
  manifest["format"] = "critgraph-corpus";
  manifest["format_version"] = kCorpusFormatVersion;
  manifest["family"] = family_name(corpus.family);
  manifest["kind"] = kind_name(corpus.kind);
  manifest["metric"] = metric_name(corpus.metric);
  manifest["seed"] = corpus.seed;
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    char graph_name[32], table_name[32];
    std::snprintf(graph_name, sizeof graph_name, "graph_%03zu.txt", i);
    std::snprintf(table_name, sizeof table_name, "table_%03zu.csv", i);
    save_graph(corpus.entries[i].graph, (fs::path(dir) / graph_name).string());
    save_table(corpus.entries[i].truth, (fs::path(dir) / table_name).string());
    nlohmann::json e{{"graph", graph_name}, {"table", table_name}};
    if (!corpus.entries[i].mask.empty()) e["mask"] = corpus.entries[i].mask;
    entries.push_back(std::move(e));
  }
  manifest["entries"] = std::move(entries);
  detail::write_file((fs::path(dir) / "corpus.json").string(), manifest.dump(1));
}

inline TrainingCorpus load_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  const std::string manifest_path = (fs::path(dir) / "corpus.json").string();
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(detail::read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw io_error(manifest_path + ": not a valid manifest (" + e.what() + ")");
  }
  try {
    if (manifest.value("format", "") != "critgraph-corpus")
      throw io_error(manifest_path + ": not a corpus manifest");
    if (manifest.at("format_version").get<int>() != kCorpusFormatVersion)
      throw io_error(manifest_path + ": unsupported corpus format version");
    TrainingCorpus corpus;
    corpus.family = family_from_name(manifest.at("family").get<std::string>());
    corpus.kind = kind_from_name(manifest.at("kind").get<std::string>());
    corpus.metric = metric_from_name(manifest.at("metric").get<std::string>());
    corpus.seed = manifest.at("seed").get<std::uint64_t>();
    for (const auto& e : manifest.at("entries")) {
      CorpusEntry entry;
      entry.graph =
          load_graph((fs::path(dir) / e.at("graph").get<std::string>()).string()).graph;
      entry.truth = load_table((fs::path(dir) / e.at("table").get<std::string>()).string(),
                               corpus.kind, corpus.metric);
      if (e.contains("mask")) entry.mask = e.at("mask").get<std::vector<int>>();
      corpus.entries.push_back(std::move(entry));
    }
    if (corpus.entries.empty()) throw io_error(manifest_path + ": corpus has no entries");
    return corpus;
  } catch (const nlohmann::json::exception& e) {
    throw io_error(manifest_path + ": malformed manifest (" + e.what() + ")");
  }
}

// ---------------------------------------------------------------------------
// Train configs (JSON, every field optional)

inline std::pair<TrainConfig, GnnHyperparams> load_train_config(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw io_error(path + ": not a valid config (" + e.what() + ")");
  }
  try {
    TrainConfig cfg;
    cfg.epochs = doc.value("epochs", cfg.epochs);
    cfg.pairs_per_graph_per_epoch =
        doc.value("pairs_per_graph_per_epoch", cfg.pairs_per_graph_per_epoch);
    cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
    cfg.adam_beta1 = doc.value("adam_beta1", cfg.adam_beta1);
    cfg.adam_beta2 = doc.value("adam_beta2", cfg.adam_beta2);
    cfg.adam_eps = doc.value("adam_eps", cfg.adam_eps);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.early_stop_patience = doc.value("early_stop_patience", cfg.early_stop_patience);
    cfg.validation_pairs = doc.value("validation_pairs", cfg.validation_pairs);
    GnnHyperparams hyper;
    if (doc.contains("hyperparams")) {
      const auto& h = doc.at("hyperparams");
      hyper.embedding_dims = h.value("embedding_dims", hyper.embedding_dims);
      hyper.regression_dims = h.value("regression_dims", hyper.regression_dims);
      hyper.input_feature_dim = h.value("input_feature_dim", hyper.input_feature_dim);
      hyper.neighbor_sample_cap = h.value("neighbor_sample_cap", hyper.neighbor_sample_cap);
      const std::string mode = h.value("degree_feature", std::string("normalized"));
      if (mode != "normalized" && mode != "raw")
        throw io_error(path + ": unknown degree_feature '" + mode + "'");
      hyper.degree_feature = mode == "raw" ? DegreeFeature::raw : DegreeFeature::normalized;
    }
    return {cfg, hyper};
  } catch (const nlohmann::json::exception& e) {
    throw io_error(path + ": malformed config (" + e.what() + ")");
  }
}

// ---------------------------------------------------------------------------
// Evaluation reports (CSV)

inline std::string report_csv_header() {
  return "graph,model,kind,metric,top_pct,top_accuracy,pairwise_accuracy,predict_seconds,"
         "oracle_seconds\n";
}

inline std::string render_report_row(const EvalReport& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? detail::render_double(*v) : std::string();
  };
  return r.graph_id + "," + r.model_id + "," + kind_name(r.kind) + "," + metric_name(r.metric) +
         "," + detail::render_double(r.top_pct) + "," + opt(r.top_accuracy) + "," +
         opt(r.pairwise_accuracy) + "," + detail::render_double(r.predict_seconds) + "," +
         opt(r.oracle_seconds) + "\n";
}

inline void save_report(const EvalReport& r, const std::string& path) {
  detail::write_file(path, report_csv_header() + render_report_row(r));
}

// Line-oriented training log.
inline std::string render_train_log(const std::vector<EpochRecord>& log) {
  std::string text = "epoch,mean_loss,val_accuracy\n";
  for (const auto& rec : log)
    text += std::to_string(rec.epoch) + "," + detail::render_double(rec.mean_loss) + "," +
            detail::render_double(rec.val_accuracy) + "\n";
  return text;
}

}  // namespace critgraph
