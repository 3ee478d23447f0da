#include "gnnpool/data/tu_dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "gnnpool/errors.hpp"

namespace gnnpool {
namespace {

std::vector<long long> read_integers(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IngestionError("cannot open required file " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::vector<long long> out;
  std::size_t i = 0;
  std::size_t line = 1;
  while (i < text.size()) {
    const char ch = text[i];
    if (ch == '\n') ++line;
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    if (text[j] == '-' || text[j] == '+') ++j;
    const std::size_t digits_start = j;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    if (j == digits_start) {
      throw FormatError(file.filename().string() + ":" + std::to_string(line) +
                        ": expected an integer");
    }
    out.push_back(std::stoll(text.substr(i, j - i)));
    i = j;
  }
  return out;
}

std::size_t max_degree(const SparseMatrix& a) {
  std::size_t best = 0;
  for (std::size_t r = 0; r < a.rows(); ++r) best = std::max(best, a.row_ptr()[r + 1] - a.row_ptr()[r]);
  return best;
}

// Sorted distinct values mapped to 0..k-1.
std::map<long long, std::size_t> vocabulary(const std::vector<long long>& values) {
  std::map<long long, std::size_t> vocab;
  for (long long v : values) vocab.emplace(v, 0);
  std::size_t next = 0;
  for (auto& [value, index] : vocab) index = next++;
  return vocab;
}

double rel_error(double actual, double expected) {
  return std::abs(actual - expected) / std::abs(expected);
}

}  // namespace

std::string_view dataset_cli_name(DatasetName name) {
  switch (name) {
    case DatasetName::mutag: return "mutag";
    case DatasetName::proteins: return "proteins";
    case DatasetName::imdb_binary: return "imdb-binary";
    case DatasetName::reddit_binary: return "reddit-binary";
  }
  return "?";
}

std::string_view dataset_file_prefix(DatasetName name) {
  switch (name) {
    case DatasetName::mutag: return "MUTAG";
    case DatasetName::proteins: return "PROTEINS";
    case DatasetName::imdb_binary: return "IMDB-BINARY";
    case DatasetName::reddit_binary: return "REDDIT-BINARY";
  }
  return "?";
}

DatasetName parse_dataset(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (DatasetName n : kAllDatasets)
    if (lower == dataset_cli_name(n)) return n;
  throw ArgumentError("unknown dataset '" + std::string(text) +
                      "' (valid: mutag, proteins, imdb-binary, reddit-binary)");
}

DatasetStats reference_stats(DatasetName name) {
  switch (name) {
    case DatasetName::mutag: return {188, 2, 17.7, 38.9};
    case DatasetName::proteins: return {1113, 2, 39.06, 72.82};
    case DatasetName::imdb_binary: return {1000, 2, 19.77, 96.53};
    case DatasetName::reddit_binary: return {2000, 2, 429.63, 497.75};
  }
  return {};
}

DatasetSpec DatasetSpec::under(const std::filesystem::path& root, DatasetName name) {
  return {name, root / std::string(dataset_file_prefix(name)), reference_stats(name)};
}

std::string_view feature_source_name(FeatureSource source) {
  switch (source) {
    case FeatureSource::node_labels: return "node-labels";
    case FeatureSource::degree: return "degree";
    case FeatureSource::constant: return "constant";
  }
  return "?";
}

std::size_t Dataset::max_nodes() const {
  std::size_t best = 0;
  for (const Graph& g : graphs) best = std::max(best, g.num_nodes());
  return best;
}

Tensor make_node_features(const SparseMatrix& adjacency, std::span<const std::size_t> node_labels,
                          const FeatureSpec& spec) {
  const std::size_t n = adjacency.rows();
  if (spec.source == FeatureSource::constant) return Tensor::full({n, 1}, 1.0);
  if (spec.width < 1) throw ArgumentError("make_node_features: width must be at least 1");
  std::vector<double> x(n * spec.width, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t hot;
    if (spec.source == FeatureSource::node_labels) {
      if (node_labels.size() != n) throw DimensionError("make_node_features: one label per node required");
      hot = node_labels[v];
      if (hot >= spec.width) throw IndexError("make_node_features: label outside vocabulary");
    } else {
      hot = std::min(adjacency.row_ptr()[v + 1] - adjacency.row_ptr()[v], spec.width - 1);
    }
    x[v * spec.width + hot] = 1.0;
  }
  return Tensor::matrix(n, spec.width, std::move(x));
}

Dataset load_tu_directory(const std::filesystem::path& dir, const std::string& prefix,
                          const FeatureOptions& options) {
  const auto file = [&](const char* suffix) { return dir / (prefix + suffix); };
  const auto edges = read_integers(file("_A.txt"));
  const auto indicator = read_integers(file("_graph_indicator.txt"));
  const auto graph_labels = read_integers(file("_graph_labels.txt"));
  std::vector<long long> node_labels;
  const bool has_node_labels = std::filesystem::exists(file("_node_labels.txt"));
  if (has_node_labels) node_labels = read_integers(file("_node_labels.txt"));

  const std::size_t num_nodes = indicator.size();
  const std::size_t num_graphs = graph_labels.size();
  if (edges.size() % 2 != 0) throw FormatError(prefix + "_A.txt: odd number of node ids");
  if (has_node_labels && node_labels.size() != num_nodes)
    throw FormatError(prefix + "_node_labels.txt: line count differs from graph indicator");

  // Local index of every node within its graph.
  std::vector<std::size_t> local(num_nodes);
  std::vector<std::size_t> sizes(num_graphs, 0);
  for (std::size_t v = 0; v < num_nodes; ++v) {
    const long long g = indicator[v];
    if (g < 1 || static_cast<std::size_t>(g) > num_graphs) {
      throw FormatError(prefix + "_graph_indicator.txt: node " + std::to_string(v + 1) +
                        " names graph " + std::to_string(g) + " outside [1, " +
                        std::to_string(num_graphs) + "]");
    }
    local[v] = sizes[static_cast<std::size_t>(g - 1)]++;
  }

  std::vector<std::vector<Triplet>> triplets(num_graphs);
  for (std::size_t e = 0; e < edges.size(); e += 2) {
    const long long u = edges[e], w = edges[e + 1];
    if (u < 1 || w < 1 || static_cast<std::size_t>(u) > num_nodes ||
        static_cast<std::size_t>(w) > num_nodes) {
      throw FormatError(prefix + "_A.txt: edge (" + std::to_string(u) + ", " + std::to_string(w) +
                        ") names a node outside [1, " + std::to_string(num_nodes) + "]");
    }
    const std::size_t ui = static_cast<std::size_t>(u - 1), wi = static_cast<std::size_t>(w - 1);
    if (indicator[ui] != indicator[wi]) {
      throw FormatError(prefix + "_A.txt: edge (" + std::to_string(u) + ", " + std::to_string(w) +
                        ") joins nodes of different graphs");
    }
    if (ui == wi) continue;
    auto& t = triplets[static_cast<std::size_t>(indicator[ui] - 1)];
    t.push_back({local[ui], local[wi], 1.0});
    t.push_back({local[wi], local[ui], 1.0});
  }

  const auto class_vocab = vocabulary(graph_labels);
  const auto label_vocab = vocabulary(node_labels);

  std::vector<SparseMatrix> adjacency(num_graphs);
  std::size_t dataset_max_degree = 0;
  for (std::size_t g = 0; g < num_graphs; ++g) {
    auto& t = triplets[g];
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    t.erase(std::unique(t.begin(), t.end()), t.end());
    adjacency[g] = SparseMatrix(sizes[g], sizes[g], std::move(t));
    dataset_max_degree = std::max(dataset_max_degree, max_degree(adjacency[g]));
  }

  FeatureSpec spec;
  if (options.constant) {
    spec = {FeatureSource::constant, 1};
  } else if (has_node_labels) {
    spec = {FeatureSource::node_labels, label_vocab.size()};
  } else {
    std::size_t cap = dataset_max_degree;
    if (options.degree_cap) cap = std::min(cap, *options.degree_cap);
    spec = {FeatureSource::degree, cap + 1};
  }

  std::vector<std::vector<std::size_t>> labels_per_graph(num_graphs);
  if (has_node_labels) {
    for (std::size_t g = 0; g < num_graphs; ++g) labels_per_graph[g].resize(sizes[g]);
    for (std::size_t v = 0; v < num_nodes; ++v)
      labels_per_graph[static_cast<std::size_t>(indicator[v] - 1)][local[v]] =
          label_vocab.at(node_labels[v]);
  }

  Dataset out;
  out.name = prefix;
  out.num_classes = class_vocab.size();
  out.feature_width = spec.source == FeatureSource::constant ? 1 : spec.width;
  out.provenance = spec.source;
  out.graphs.reserve(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    Tensor x = make_node_features(adjacency[g], labels_per_graph[g], spec);
    out.graphs.emplace_back(adjacency[g], std::move(x), class_vocab.at(graph_labels[g]), g);
  }
  return out;
}

Dataset load_tu_dataset(const DatasetSpec& spec, const FeatureOptions& options) {
  FeatureOptions effective = options;
  if (!effective.degree_cap && spec.name == DatasetName::reddit_binary) effective.degree_cap = 64;
  return load_tu_directory(spec.path, std::string(dataset_file_prefix(spec.name)), effective);
}

DatasetSummary compute_dataset_stats(const Dataset& dataset) {
  if (dataset.graphs.empty()) throw ArgumentError("compute_dataset_stats: empty dataset");
  DatasetSummary s;
  s.graphs = dataset.graphs.size();
  s.classes = dataset.num_classes;
  double nodes = 0.0, undirected = 0.0, directed = 0.0;
  for (const Graph& g : dataset.graphs) {
    nodes += static_cast<double>(g.num_nodes());
    undirected += static_cast<double>(g.num_undirected_edges());
    directed += static_cast<double>(g.adjacency().nnz());
  }
  const double n = static_cast<double>(s.graphs);
  s.avg_nodes = nodes / n;
  s.avg_undirected_edges = undirected / n;
  s.avg_directed_edges = directed / n;
  return s;
}

StatsComparison compare_stats(const DatasetSummary& actual, const DatasetStats& expected) {
  StatsComparison c;
  c.graphs_match = actual.graphs == expected.graphs;
  c.classes_match = actual.classes == expected.classes;
  c.nodes_rel_error = rel_error(actual.avg_nodes, expected.avg_nodes);
  c.undirected_rel_error = rel_error(actual.avg_undirected_edges, expected.avg_edges);
  c.directed_rel_error = rel_error(actual.avg_directed_edges, expected.avg_edges);
  if (c.undirected_rel_error <= c.directed_rel_error) {
    c.edge_convention = "undirected";
    c.edges_rel_error = c.undirected_rel_error;
  } else {
    c.edge_convention = "directed";
    c.edges_rel_error = c.directed_rel_error;
  }
  return c;
}

}  // namespace gnnpool
