#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gnnpool/autodiff/tensor.hpp"
#include "gnnpool/graph/sparse_matrix.hpp"

namespace gnnpool {

// One classification sample: symmetric binary adjacency, node features and a
// class label. Normalized adjacencies are computed once at construction.
class Graph {
 public:
  // Throws ValidationError if the adjacency is not square, symmetric and
  // binary, or if features do not have one row per node.
  Graph(SparseMatrix adjacency, Tensor features, std::size_t label, std::size_t id = 0);

  std::size_t num_nodes() const { return adjacency_.rows(); }
  std::size_t feature_width() const { return features_.cols(); }
  const SparseMatrix& adjacency() const { return adjacency_; }
  const Tensor& features() const { return features_; }
  std::size_t label() const { return label_; }
  std::size_t id() const { return id_; }

  const SparseMatrix& gcn_normalized() const { return gcn_norm_; }
  const SparseMatrix& tagcn_normalized() const { return tagcn_norm_; }
  const SparseMatrix& mean_normalized() const { return mean_norm_; }

  // Undirected edge count (each symmetric pair once, self-loops once).
  std::size_t num_undirected_edges() const;

 private:
  SparseMatrix adjacency_;
  Tensor features_;
  std::size_t label_;
  std::size_t id_;
  SparseMatrix gcn_norm_;
  SparseMatrix tagcn_norm_;
  SparseMatrix mean_norm_;
};

// Disjoint union of graphs for mini-batch training.
struct GraphBatch {
  SparseMatrix adjacency;
  SparseMatrix gcn_norm;
  SparseMatrix tagcn_norm;
  SparseMatrix mean_norm;
  Tensor features;
  std::vector<std::size_t> node_to_graph;
  std::vector<std::size_t> offsets;  // num_graphs + 1 node offsets
  std::vector<std::size_t> labels;
  std::vector<std::size_t> ids;

  std::size_t num_graphs() const { return labels.size(); }
  std::size_t num_nodes() const { return node_to_graph.size(); }
  std::size_t max_graph_size() const;

  // Recovers graph b from the block-diagonal form.
  Graph slice(std::size_t b) const;
};

// Throws ValidationError on an empty list or mixed feature widths.
GraphBatch batch_graphs(std::span<const Graph* const> graphs);
GraphBatch batch_graphs(std::span<const Graph> graphs);

}  // namespace gnnpool
