#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <variant>

#include "gnnpool/autodiff/tensor.hpp"
#include "gnnpool/graph/graph.hpp"
#include "gnnpool/graph/sparse_matrix.hpp"

namespace gnnpool {

enum class Normalization { gcn, tagcn, mean };

// Propagation operator of a layer. Either a constant sparse matrix (input
// graphs, node-selection pooling) or a dense tensor that may carry gradient
// (the S^T A S product of assignment pooling).
class Adjacency {
 public:
  explicit Adjacency(SparseMatrix s);
  explicit Adjacency(Tensor dense);

  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(rep_); }
  const SparseMatrix& sparse() const;
  const Tensor& dense() const;
  std::size_t size() const;

  // A * x
  Tensor apply(const Tensor& x) const;
  // Dense values; the sparse form is returned as a constant tensor.
  Tensor to_tensor() const;

  // Same formulas as normalize_gcn / normalize_tagcn / normalize_mean. The
  // dense path is built from differentiable ops.
  Adjacency normalized(Normalization kind) const;

 private:
  std::variant<SparseMatrix, Tensor> rep_;
};

// Raw adjacency plus lazily computed, cached normalizations.
class Topology {
 public:
  explicit Topology(Adjacency raw);
  static Topology from_batch(const GraphBatch& batch);
  static Topology from_graph(const Graph& graph);

  const Adjacency& raw() const { return raw_; }
  const Adjacency& get(Normalization kind) const;

 private:
  Adjacency raw_;
  mutable std::array<std::optional<Adjacency>, 3> cache_;
};

}  // namespace gnnpool
