#include "gnnpool/graph/adjacency.hpp"

#include "gnnpool/autodiff/ops.hpp"
#include "gnnpool/errors.hpp"

namespace gnnpool {

Adjacency::Adjacency(SparseMatrix s) : rep_(std::move(s)) {
  if (sparse().rows() != sparse().cols()) throw DimensionError("adjacency must be square");
}

Adjacency::Adjacency(Tensor dense) : rep_(std::move(dense)) {
  const Tensor& t = std::get<Tensor>(rep_);
  if (t.rank() != 2 || t.rows() != t.cols()) {
    throw DimensionError("adjacency must be square, got " + shape_string(t.shape()));
  }
}

const SparseMatrix& Adjacency::sparse() const {
  if (!is_sparse()) throw ArgumentError("adjacency is dense");
  return std::get<SparseMatrix>(rep_);
}

const Tensor& Adjacency::dense() const {
  if (is_sparse()) throw ArgumentError("adjacency is sparse");
  return std::get<Tensor>(rep_);
}

std::size_t Adjacency::size() const {
  return is_sparse() ? sparse().rows() : dense().rows();
}

Tensor Adjacency::apply(const Tensor& x) const {
  return is_sparse() ? spmm(sparse(), x) : matmul(dense(), x);
}

Tensor Adjacency::to_tensor() const {
  if (!is_sparse()) return dense();
  return Tensor::matrix(sparse().rows(), sparse().cols(), sparse().to_dense());
}

Adjacency Adjacency::normalized(Normalization kind) const {
  if (is_sparse()) {
    switch (kind) {
      case Normalization::gcn: return Adjacency(normalize_gcn(sparse()));
      case Normalization::tagcn: return Adjacency(normalize_tagcn(sparse()));
      case Normalization::mean: return Adjacency(normalize_mean(sparse()));
    }
  }
  const Tensor& a = dense();
  switch (kind) {
    case Normalization::gcn: {
      const Tensor with_loops = add(a, Tensor::identity(a.rows()));
      const Tensor d = inv_sqrt_or_zero(row_sum(with_loops));
      return Adjacency(scale_cols(scale_rows(with_loops, d), d));
    }
    case Normalization::tagcn: {
      const Tensor d = inv_sqrt_or_zero(row_sum(a));
      return Adjacency(scale_cols(scale_rows(a, d), d));
    }
    case Normalization::mean:
      return Adjacency(scale_rows(a, reciprocal_or_zero(row_sum(a))));
  }
  throw ArgumentError("unknown normalization");
}

Topology::Topology(Adjacency raw) : raw_(std::move(raw)) {}

Topology Topology::from_batch(const GraphBatch& batch) {
  Topology t{Adjacency(batch.adjacency)};
  t.cache_[static_cast<int>(Normalization::gcn)] = Adjacency(batch.gcn_norm);
  t.cache_[static_cast<int>(Normalization::tagcn)] = Adjacency(batch.tagcn_norm);
  t.cache_[static_cast<int>(Normalization::mean)] = Adjacency(batch.mean_norm);
  return t;
}

Topology Topology::from_graph(const Graph& graph) {
  Topology t{Adjacency(graph.adjacency())};
  t.cache_[static_cast<int>(Normalization::gcn)] = Adjacency(graph.gcn_normalized());
  t.cache_[static_cast<int>(Normalization::tagcn)] = Adjacency(graph.tagcn_normalized());
  t.cache_[static_cast<int>(Normalization::mean)] = Adjacency(graph.mean_normalized());
  return t;
}

const Adjacency& Topology::get(Normalization kind) const {
  auto& slot = cache_[static_cast<int>(kind)];
  if (!slot) slot = raw_.normalized(kind);
  return *slot;
}

}  // namespace gnnpool
