#include "gnnpool/simd/kernels.hpp"

#include <algorithm>

namespace gnnpool::simd {
namespace {

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    if (!accumulate) std::fill(crow, crow + n, 0.0);
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] = crow[j] + av * brow[j];
    }
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] = crow[j] + av * brow[j];
    }
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void add(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void mul(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(std::size_t n, double s, const double* x, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = s * x[i];
}

void relu(std::size_t n, const double* x, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] <= 0.0 ? 0.0 : x[i];
}

void relu_backward(std::size_t n, const double* x, const double* grad_out,
                   double* grad_in) {
  for (std::size_t i = 0; i < n; ++i)
    grad_in[i] = grad_in[i] + (x[i] > 0.0 ? grad_out[i] : 0.0);
}

void spmm(std::size_t rows, const std::size_t* row_ptr, const std::size_t* col,
          const double* vals, const double* x, std::size_t width, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* orow = out + r * width;
    std::fill(orow, orow + width, 0.0);
    for (std::size_t e = row_ptr[r]; e < row_ptr[r + 1]; ++e) {
      const double v = vals[e];
      const double* xrow = x + col[e] * width;
      for (std::size_t j = 0; j < width; ++j) orow[j] = orow[j] + v * xrow[j];
    }
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::scalar, "scalar", gemm_nn, gemm_tn,
                                 axpy,        add,      mul,     scale,
                                 relu,        relu_backward,     spmm};
  return table;
}

}  // namespace gnnpool::simd
