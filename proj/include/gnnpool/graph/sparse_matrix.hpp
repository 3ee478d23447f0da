#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "gnnpool/autodiff/tensor.hpp"

namespace gnnpool {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

// Immutable real matrix in coordinate form, entries sorted by (row, col).
// Stored row-compressed; copies share storage.
class SparseMatrix {
 public:
  SparseMatrix();
  // Sorts the triplets. Throws IndexError for out-of-range coordinates and
  // ValidationError for duplicates or non-finite values.
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);

  static SparseMatrix identity(std::size_t n);
  static SparseMatrix from_dense(std::size_t rows, std::size_t cols,
                                 std::span<const double> dense);

  std::size_t rows() const { return data_->rows; }
  std::size_t cols() const { return data_->cols; }
  std::size_t nnz() const { return data_->col.size(); }

  std::vector<Triplet> entries() const;
  std::span<const std::size_t> row_ptr() const { return data_->row_ptr; }
  std::span<const std::size_t> col_index() const { return data_->col; }
  std::span<const double> values() const { return data_->val; }

  double at(std::size_t r, std::size_t c) const;
  bool is_symmetric() const { return data_->symmetric; }
  bool is_binary() const;

  SparseMatrix transposed() const;
  std::vector<double> to_dense() const;
  // Principal submatrix on the given rows/columns, reindexed in keep order.
  SparseMatrix principal_submatrix(std::span<const std::size_t> keep) const;

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b);

 private:
  struct Data {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col;
    std::vector<double> val;
    bool symmetric = true;
  };
  explicit SparseMatrix(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
  static std::shared_ptr<const Data> build(std::size_t rows, std::size_t cols,
                                           std::vector<Triplet> entries);

  std::shared_ptr<const Data> data_;

  friend SparseMatrix block_diagonal(std::span<const SparseMatrix* const> blocks);
};

SparseMatrix block_diagonal(std::span<const SparseMatrix* const> blocks);

// s * x, differentiable in x. Rows accumulate entries in column order, so the
// result equals the dense product summed left to right.
Tensor spmm(const SparseMatrix& s, const Tensor& x);

// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
SparseMatrix normalize_gcn(const SparseMatrix& a);
// D^-1/2 A D^-1/2; isolated nodes get all-zero rows and columns.
SparseMatrix normalize_tagcn(const SparseMatrix& a);
// D^-1 A (neighbor mean); isolated nodes get zero rows.
SparseMatrix normalize_mean(const SparseMatrix& a);

}  // namespace gnnpool
