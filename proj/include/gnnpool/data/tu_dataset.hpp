#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnnpool/graph/graph.hpp"

namespace gnnpool {

enum class DatasetName { mutag, proteins, imdb_binary, reddit_binary };

inline constexpr DatasetName kAllDatasets[] = {DatasetName::mutag, DatasetName::proteins,
                                               DatasetName::imdb_binary,
                                               DatasetName::reddit_binary};

// "mutag", "proteins", "imdb-binary", "reddit-binary"
std::string_view dataset_cli_name(DatasetName name);
// Directory and file prefix: "MUTAG", "PROTEINS", "IMDB-BINARY", "REDDIT-BINARY"
std::string_view dataset_file_prefix(DatasetName name);
// Accepts either spelling, case-insensitive.
DatasetName parse_dataset(std::string_view text);

struct DatasetStats {
  std::size_t graphs = 0;
  std::size_t classes = 0;
  double avg_nodes = 0.0;
  double avg_edges = 0.0;
};

// Published reference statistics for the four benchmarks.
DatasetStats reference_stats(DatasetName name);

struct DatasetSpec {
  DatasetName name;
  std::filesystem::path path;  // directory holding <PREFIX>_A.txt etc.
  DatasetStats expected;

  // path = root / <PREFIX>
  static DatasetSpec under(const std::filesystem::path& root, DatasetName name);
};

enum class FeatureSource { node_labels, degree, constant };

std::string_view feature_source_name(FeatureSource source);

struct FeatureOptions {
  bool constant = false;                   // ignore labels and degrees, one constant feature
  std::optional<std::size_t> degree_cap;   // default: 64 for REDDIT-BINARY, otherwise max degree
};

struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  std::size_t num_classes = 0;
  std::size_t feature_width = 0;
  FeatureSource provenance = FeatureSource::node_labels;

  std::size_t max_nodes() const;
};

// Feature layout for make_node_features.
struct FeatureSpec {
  FeatureSource source = FeatureSource::node_labels;
  std::size_t width = 1;  // label vocabulary size, or degree cap + 1
};

// One-hot node label, one-hot degree (clamped into the last bucket), or a
// single constant 1. node_labels must be dense indices when source is node_labels.
Tensor make_node_features(const SparseMatrix& adjacency, std::span<const std::size_t> node_labels,
                          const FeatureSpec& spec);

// Reads <PREFIX>_A.txt, <PREFIX>_graph_indicator.txt, <PREFIX>_graph_labels.txt
// and the optional <PREFIX>_node_labels.txt from dir. Edges are symmetrized,
// self-loops dropped, labels remapped to dense ranges.
Dataset load_tu_directory(const std::filesystem::path& dir, const std::string& prefix,
                          const FeatureOptions& options = {});
Dataset load_tu_dataset(const DatasetSpec& spec, const FeatureOptions& options = {});

struct DatasetSummary {
  std::size_t graphs = 0;
  std::size_t classes = 0;
  double avg_nodes = 0.0;
  double avg_undirected_edges = 0.0;
  double avg_directed_edges = 0.0;  // nonzero adjacency entries, i.e. twice the undirected count
};

DatasetSummary compute_dataset_stats(const Dataset& dataset);

struct StatsComparison {
  bool graphs_match = false;
  bool classes_match = false;
  double nodes_rel_error = 0.0;
  double undirected_rel_error = 0.0;
  double directed_rel_error = 0.0;
  std::string edge_convention;  // "undirected" or "directed", whichever is closer
  double edges_rel_error = 0.0; // error under edge_convention

  bool within(double tolerance) const {
    return graphs_match && classes_match && nodes_rel_error <= tolerance &&
           edges_rel_error <= tolerance;
  }
};

StatsComparison compare_stats(const DatasetSummary& actual, const DatasetStats& expected);

}  // namespace gnnpool
