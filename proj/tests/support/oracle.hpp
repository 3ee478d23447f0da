#pragma once

// Straight-line dense reference implementations. Nothing here calls into the
// library's kernels or ops; inputs and outputs are plain nested vectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

#include "gnnpool/autodiff/tensor.hpp"
#include "gnnpool/graph/sparse_matrix.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

inline Dense from_tensor(const gnnpool::Tensor& t) {
  Dense d = zeros(t.rows(), t.cols());
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) d[i][j] = t.values()[i * t.cols() + j];
  return d;
}

inline Dense from_sparse(const gnnpool::SparseMatrix& s) {
  Dense d = zeros(s.rows(), s.cols());
  for (const auto& t : s.entries()) d[t.row][t.col] = t.value;
  return d;
}

inline gnnpool::Tensor to_tensor(const Dense& d, bool requires_grad = false) {
  const std::size_t r = d.size(), c = r ? d[0].size() : 0;
  std::vector<double> v;
  for (const auto& row : d) v.insert(v.end(), row.begin(), row.end());
  return gnnpool::Tensor::matrix(r, c, std::move(v), requires_grad);
}

inline Dense matmul(const Dense& a, const Dense& b) {
  const std::size_t m = a.size(), k = b.size(), n = k ? b[0].size() : 0;
  Dense c = zeros(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i][p] * b[p][j];
      c[i][j] = s;
    }
  return c;
}

inline Dense transpose(const Dense& a) {
  const std::size_t m = a.size(), n = m ? a[0].size() : 0;
  Dense t = zeros(n, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) t[j][i] = a[i][j];
  return t;
}

inline Dense add(Dense a, const Dense& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
  return a;
}

inline Dense add_bias(Dense a, const std::vector<double>& b) {
  for (auto& row : a)
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += b[j];
  return a;
}

inline Dense relu(Dense a) {
  for (auto& row : a)
    for (double& v : row) v = v > 0.0 ? v : 0.0;
  return a;
}

inline Dense hconcat(const Dense& a, const Dense& b) {
  Dense out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i].insert(out[i].end(), b[i].begin(), b[i].end());
  return out;
}

inline Dense identity(std::size_t n) {
  Dense d = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 1.0;
  return d;
}

inline std::vector<double> degrees(const Dense& a) {
  std::vector<double> d(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (double v : a[i]) d[i] += v;
  return d;
}

// D^-1/2 M D^-1/2 with zero for zero degree.
inline Dense symmetric_normalize(const Dense& m) {
  const auto d = degrees(m);
  Dense out = zeros(m.size(), m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) {
      const double si = d[i] > 0 ? 1.0 / std::sqrt(d[i]) : 0.0;
      const double sj = d[j] > 0 ? 1.0 / std::sqrt(d[j]) : 0.0;
      out[i][j] = si * m[i][j] * sj;
    }
  return out;
}

inline Dense gcn_norm(const Dense& a) { return symmetric_normalize(add(a, identity(a.size()))); }
inline Dense tagcn_norm(const Dense& a) { return symmetric_normalize(a); }

inline Dense mean_norm(const Dense& a) {
  const auto d = degrees(a);
  Dense out = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (double& v : out[i]) v = d[i] > 0 ? v / d[i] : 0.0;
  return out;
}

inline Dense gcn(const Dense& a, const Dense& x, const Dense& w, const std::vector<double>& b,
                 bool use_relu) {
  Dense out = add_bias(matmul(matmul(gcn_norm(a), x), w), b);
  return use_relu ? relu(out) : out;
}

inline Dense sage(const Dense& a, const Dense& x, const Dense& w, const std::vector<double>& b,
                  bool use_relu) {
  Dense out = add_bias(matmul(hconcat(x, matmul(mean_norm(a), x)), w), b);
  return use_relu ? relu(out) : out;
}

// Materializes every power of the normalized adjacency.
inline Dense tagcn(const Dense& a, const Dense& x, const std::vector<Dense>& ws,
                   const std::vector<double>& b, bool use_relu) {
  const Dense t = tagcn_norm(a);
  Dense power = identity(a.size());
  Dense out = zeros(x.size(), ws[0][0].size());
  for (const Dense& w : ws) {
    out = add(out, matmul(matmul(power, x), w));
    power = matmul(power, t);
  }
  out = add_bias(out, b);
  return use_relu ? relu(out) : out;
}

inline std::vector<double> row_softmax_row(const std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  std::vector<double> e(z.size());
  double s = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) s += (e[j] = std::exp(z[j] - mx));
  for (double& v : e) v /= s;
  return e;
}

inline Dense row_softmax(const Dense& z) {
  Dense out;
  for (const auto& row : z) out.push_back(row_softmax_row(row));
  return out;
}

// Indices of the k largest scores, smaller index first on ties, returned ascending.
inline std::vector<std::size_t> topk(const std::vector<double>& y, std::size_t k) {
  std::vector<std::size_t> idx(y.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return y[a] != y[b] ? y[a] > y[b] : a < b;
  });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct Pooled {
  Dense x;
  Dense a;
  std::vector<std::size_t> kept;
};

inline Pooled gate_and_select(const Dense& x, const Dense& a, const std::vector<double>& y,
                              std::size_t k) {
  Pooled out;
  out.kept = topk(y, k);
  for (std::size_t u : out.kept) {
    std::vector<double> row = x[u];
    for (double& v : row) v *= std::tanh(y[u]);
    out.x.push_back(row);
    std::vector<double> arow;
    for (std::size_t w : out.kept) arow.push_back(a[u][w]);
    out.a.push_back(arow);
  }
  return out;
}

inline Pooled topk_pool(const Dense& x, const Dense& a, const std::vector<double>& p,
                        std::size_t k) {
  double norm = 0.0;
  for (double v : p) norm += v * v;
  norm = std::sqrt(norm);
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) y[i] += x[i][j] * p[j];
    y[i] /= norm;
  }
  return gate_and_select(x, a, y, k);
}

inline Pooled sag_pool(const Dense& x, const Dense& a, const Dense& w, const std::vector<double>& b,
                       std::size_t k) {
  const Dense score = gcn(a, x, w, b, false);
  std::vector<double> y;
  for (const auto& row : score) y.push_back(row[0]);
  return gate_and_select(x, a, y, k);
}

inline Pooled diff_pool(const Dense& x, const Dense& a, const Dense& we, const std::vector<double>& be,
                        const Dense& wa, const std::vector<double>& ba) {
  const Dense z = sage(a, x, we, be, true);
  const Dense s = row_softmax(sage(a, x, wa, ba, false));
  return {matmul(transpose(s), z), matmul(matmul(transpose(s), a), s), {}};
}

// Rows of [layers..., last] ordered by channels from last to first
// (descending), then by index; k rows with zero padding.
inline Dense sort_pool(const std::vector<Dense>& layers, std::size_t k) {
  Dense cat = layers[0];
  for (std::size_t l = 1; l < layers.size(); ++l) cat = hconcat(cat, layers[l]);
  std::vector<std::size_t> idx(cat.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t u, std::size_t v) {
    for (std::size_t c = cat[u].size(); c-- > 0;)
      if (cat[u][c] != cat[v][c]) return cat[u][c] > cat[v][c];
    return u < v;
  });
  const std::size_t width = cat.empty() ? 0 : cat[0].size();
  Dense out;
  for (std::size_t r = 0; r < k; ++r)
    out.push_back(r < idx.size() ? cat[idx[r]] : std::vector<double>(width, 0.0));
  return out;
}

inline std::vector<double> column_mean(const Dense& x) {
  std::vector<double> m(x.empty() ? 0 : x[0].size(), 0.0);
  for (const auto& row : x)
    for (std::size_t j = 0; j < row.size(); ++j) m[j] += row[j];
  for (double& v : m) v /= static_cast<double>(x.size());
  return m;
}

inline double max_abs_diff(const Dense& a, const Dense& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return INFINITY;
    for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  }
  return m;
}

// Random symmetric binary adjacency without self-loops.
inline gnnpool::SparseMatrix random_graph(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution edge(p);
  std::vector<gnnpool::Triplet> t;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (edge(rng)) {
        t.push_back({i, j, 1.0});
        t.push_back({j, i, 1.0});
      }
  return gnnpool::SparseMatrix(n, n, std::move(t));
}

inline Dense random_dense(std::size_t r, std::size_t c, std::mt19937_64& rng, double lo = -1.0,
                          double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Dense d = zeros(r, c);
  for (auto& row : d)
    for (double& v : row) v = u(rng);
  return d;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline Dense permute(const Dense& m, const std::vector<std::size_t>& perm, bool both_sides) {
  // Row i of the result is row perm[i] of m (P m), columns likewise when both_sides (P m P^T).
  Dense out = zeros(m.size(), m.empty() ? 0 : m[0].size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < out[i].size(); ++j)
      out[i][j] = both_sides ? m[perm[i]][perm[j]] : m[perm[i]][j];
  return out;
}

}  // namespace oracle
