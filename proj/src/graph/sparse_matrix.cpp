#include "gnnpool/graph/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gnnpool/errors.hpp"
#include "gnnpool/simd/kernels.hpp"

namespace gnnpool {

SparseMatrix::SparseMatrix() : data_(std::make_shared<const Data>()) {}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<Triplet> entries)
    : data_(build(rows, cols, std::move(entries))) {}

std::shared_ptr<const SparseMatrix::Data> SparseMatrix::build(std::size_t rows,
                                                              std::size_t cols,
                                                              std::vector<Triplet> entries) {
  for (const Triplet& t : entries) {
    if (t.row >= rows || t.col >= cols) {
      throw IndexError("sparse entry (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                       ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!std::isfinite(t.value)) throw ValidationError("sparse entry value is not finite");
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].row == entries[i - 1].row && entries[i].col == entries[i - 1].col) {
      throw ValidationError("duplicate sparse entry (" + std::to_string(entries[i].row) + "," +
                            std::to_string(entries[i].col) + ")");
    }
  }
  auto data = std::make_shared<Data>();
  data->rows = rows;
  data->cols = cols;
  data->row_ptr.assign(rows + 1, 0);
  data->col.reserve(entries.size());
  data->val.reserve(entries.size());
  for (const Triplet& t : entries) {
    ++data->row_ptr[t.row + 1];
    data->col.push_back(t.col);
    data->val.push_back(t.value);
  }
  for (std::size_t r = 0; r < rows; ++r) data->row_ptr[r + 1] += data->row_ptr[r];

  bool symmetric = rows == cols;
  for (std::size_t r = 0; symmetric && r < rows; ++r) {
    for (std::size_t e = data->row_ptr[r]; e < data->row_ptr[r + 1]; ++e) {
      const std::size_t c = data->col[e];
      const auto first = data->col.begin() + static_cast<std::ptrdiff_t>(data->row_ptr[c]);
      const auto last = data->col.begin() + static_cast<std::ptrdiff_t>(data->row_ptr[c + 1]);
      const auto hit = std::lower_bound(first, last, r);
      if (hit == last || *hit != r ||
          data->val[static_cast<std::size_t>(hit - data->col.begin())] != data->val[e]) {
        symmetric = false;
        break;
      }
    }
  }
  data->symmetric = symmetric;
  return data;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return SparseMatrix(n, n, std::move(t));
}

SparseMatrix SparseMatrix::from_dense(std::size_t rows, std::size_t cols,
                                      std::span<const double> dense) {
  if (dense.size() != rows * cols) throw DimensionError("from_dense: size mismatch");
  std::vector<Triplet> t;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (dense[r * cols + c] != 0.0) t.push_back({r, c, dense[r * cols + c]});
  return SparseMatrix(rows, cols, std::move(t));
}

std::vector<Triplet> SparseMatrix::entries() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t e = data_->row_ptr[r]; e < data_->row_ptr[r + 1]; ++e)
      out.push_back({r, data_->col[e], data_->val[e]});
  return out;
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  if (r >= rows() || c >= cols()) throw IndexError("sparse at(): index out of range");
  const auto first = data_->col.begin() + static_cast<std::ptrdiff_t>(data_->row_ptr[r]);
  const auto last = data_->col.begin() + static_cast<std::ptrdiff_t>(data_->row_ptr[r + 1]);
  const auto hit = std::lower_bound(first, last, c);
  if (hit == last || *hit != c) return 0.0;
  return data_->val[static_cast<std::size_t>(hit - data_->col.begin())];
}

bool SparseMatrix::is_binary() const {
  return std::all_of(data_->val.begin(), data_->val.end(), [](double v) { return v == 1.0; });
}

SparseMatrix SparseMatrix::transposed() const {
  if (is_symmetric()) return *this;
  std::vector<Triplet> t = entries();
  for (Triplet& e : t) std::swap(e.row, e.col);
  return SparseMatrix(cols(), rows(), std::move(t));
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> out(rows() * cols(), 0.0);
  for (const Triplet& t : entries()) out[t.row * cols() + t.col] = t.value;
  return out;
}

SparseMatrix SparseMatrix::principal_submatrix(std::span<const std::size_t> keep) const {
  if (rows() != cols()) throw DimensionError("principal_submatrix of a non-square matrix");
  std::vector<std::size_t> position(rows(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= rows()) throw IndexError("principal_submatrix: index out of range");
    position[keep[i]] = i;
  }
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const std::size_t r = keep[i];
    for (std::size_t e = data_->row_ptr[r]; e < data_->row_ptr[r + 1]; ++e) {
      const std::size_t c = position[data_->col[e]];
      if (c != static_cast<std::size_t>(-1)) t.push_back({i, c, data_->val[e]});
    }
  }
  return SparseMatrix(keep.size(), keep.size(), std::move(t));
}

bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a.data_->row_ptr == b.data_->row_ptr &&
         a.data_->col == b.data_->col && a.data_->val == b.data_->val;
}

SparseMatrix block_diagonal(std::span<const SparseMatrix* const> blocks) {
  auto data = std::make_shared<SparseMatrix::Data>();
  std::size_t total_nnz = 0;
  for (const SparseMatrix* b : blocks) {
    data->rows += b->rows();
    data->cols += b->cols();
    total_nnz += b->nnz();
  }
  data->row_ptr.reserve(data->rows + 1);
  data->col.reserve(total_nnz);
  data->val.reserve(total_nnz);
  bool symmetric = true;
  std::size_t col_offset = 0;
  for (const SparseMatrix* b : blocks) {
    const std::size_t base = data->col.size();
    for (std::size_t r = 0; r < b->rows(); ++r) data->row_ptr.push_back(base + b->row_ptr()[r + 1]);
    for (std::size_t c : b->col_index()) data->col.push_back(c + col_offset);
    data->val.insert(data->val.end(), b->values().begin(), b->values().end());
    col_offset += b->cols();
    symmetric = symmetric && b->is_symmetric();
  }
  data->symmetric = symmetric;
  return SparseMatrix(std::shared_ptr<const SparseMatrix::Data>(std::move(data)));
}

Tensor spmm(const SparseMatrix& s, const Tensor& x) {
  if (x.rank() != 2 || x.rows() != s.cols()) {
    throw DimensionError("spmm: sparse " + std::to_string(s.rows()) + "x" +
                         std::to_string(s.cols()) + " times " + shape_string(x.shape()));
  }
  const std::size_t width = x.cols();
  std::vector<double> out(s.rows() * width);
  simd::active_kernels().spmm(s.rows(), s.row_ptr().data(), s.col_index().data(),
                              s.values().data(), x.values().data(), width, out.data());
  return detail::make_result(
      {s.rows(), width}, std::move(out), "spmm", {x}, [s, width](detail::Node& self) {
        detail::Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        const SparseMatrix st = s.transposed();
        std::vector<double> back(st.rows() * width);
        const auto& k = simd::active_kernels();
        k.spmm(st.rows(), st.row_ptr().data(), st.col_index().data(), st.values().data(),
               self.grad.data(), width, back.data());
        k.add(back.size(), p.grad_buffer().data(), back.data(), p.grad_buffer().data());
      });
}

namespace {

void require_symmetric_binary(const SparseMatrix& a, const char* op) {
  if (a.rows() != a.cols()) throw ValidationError(std::string(op) + ": adjacency is not square");
  if (!a.is_symmetric()) throw ValidationError(std::string(op) + ": adjacency is not symmetric");
  if (!a.is_binary()) throw ValidationError(std::string(op) + ": adjacency is not binary");
}

// m[r, c] / sqrt(d[r] * d[c]); rows or columns with d == 0 vanish.
SparseMatrix symmetric_scale(const SparseMatrix& m, const std::vector<double>& d) {
  std::vector<Triplet> t = m.entries();
  for (Triplet& e : t) {
    const double dd = d[e.row] * d[e.col];
    e.value = dd > 0.0 ? e.value / std::sqrt(dd) : 0.0;
  }
  return SparseMatrix(m.rows(), m.cols(), std::move(t));
}

// diag(left) * m * diag(right), keeping the sparsity of m.
SparseMatrix scale_entries(const SparseMatrix& m, const std::vector<double>& left,
                           const std::vector<double>& right) {
  std::vector<Triplet> t = m.entries();
  for (Triplet& e : t) e.value = left[e.row] * e.value * right[e.col];
  return SparseMatrix(m.rows(), m.cols(), std::move(t));
}

std::vector<double> degrees(const SparseMatrix& m) {
  std::vector<double> d(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t e = m.row_ptr()[r]; e < m.row_ptr()[r + 1]; ++e) d[r] += m.values()[e];
  return d;
}

}  // namespace

SparseMatrix normalize_gcn(const SparseMatrix& a) {
  require_symmetric_binary(a, "normalize_gcn");
  std::vector<Triplet> t = a.entries();
  std::vector<bool> has_diag(a.rows(), false);
  for (Triplet& e : t) {
    if (e.row == e.col) {
      e.value += 1.0;
      has_diag[e.row] = true;
    }
  }
  for (std::size_t i = 0; i < a.rows(); ++i)
    if (!has_diag[i]) t.push_back({i, i, 1.0});
  const SparseMatrix with_loops(a.rows(), a.cols(), std::move(t));
  return symmetric_scale(with_loops, degrees(with_loops));
}

SparseMatrix normalize_tagcn(const SparseMatrix& a) {
  require_symmetric_binary(a, "normalize_tagcn");
  return symmetric_scale(a, degrees(a));
}

SparseMatrix normalize_mean(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("normalize_mean: adjacency is not square");
  std::vector<double> d = degrees(a);
  for (double& v : d) v = v != 0.0 ? 1.0 / v : 0.0;
  const std::vector<double> ones(a.cols(), 1.0);
  return scale_entries(a, d, ones);
}

}  // namespace gnnpool
