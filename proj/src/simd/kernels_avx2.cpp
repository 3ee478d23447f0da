// Compiled with -mavx2 only; never called unless the CPU reports AVX2.

#include "gnnpool/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>

namespace gnnpool::simd {
namespace {

// Register-blocked panel: R rows of c, columns [j, n). a_at(r, p) yields the
// multiplier of b row p for output row r.
template <int R, typename AAt>
inline void gemm_panel(std::size_t n, std::size_t k, AAt a_at, const double* b,
                       double* c, bool accumulate) {
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d lo[R];
    __m256d hi[R];
    for (int r = 0; r < R; ++r) {
      lo[r] = accumulate ? _mm256_loadu_pd(c + r * n + j) : _mm256_setzero_pd();
      hi[r] = accumulate ? _mm256_loadu_pd(c + r * n + j + 4) : _mm256_setzero_pd();
    }
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
      const __m256d b1 = _mm256_loadu_pd(b + p * n + j + 4);
      for (int r = 0; r < R; ++r) {
        const __m256d av = _mm256_set1_pd(a_at(r, p));
        lo[r] = _mm256_add_pd(lo[r], _mm256_mul_pd(av, b0));
        hi[r] = _mm256_add_pd(hi[r], _mm256_mul_pd(av, b1));
      }
    }
    for (int r = 0; r < R; ++r) {
      _mm256_storeu_pd(c + r * n + j, lo[r]);
      _mm256_storeu_pd(c + r * n + j + 4, hi[r]);
    }
  }
  for (; j + 4 <= n; j += 4) {
    __m256d acc[R];
    for (int r = 0; r < R; ++r)
      acc[r] = accumulate ? _mm256_loadu_pd(c + r * n + j) : _mm256_setzero_pd();
    for (std::size_t p = 0; p < k; ++p) {
      const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
      for (int r = 0; r < R; ++r)
        acc[r] = _mm256_add_pd(acc[r], _mm256_mul_pd(_mm256_set1_pd(a_at(r, p)), b0));
    }
    for (int r = 0; r < R; ++r) _mm256_storeu_pd(c + r * n + j, acc[r]);
  }
  for (; j < n; ++j) {
    for (int r = 0; r < R; ++r) {
      double s = accumulate ? c[r * n + j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) s = s + a_at(r, p) * b[p * n + j];
      c[r * n + j] = s;
    }
  }
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c, bool accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* ablk = a + i * k;
    gemm_panel<4>(n, k, [ablk, k](int r, std::size_t p) { return ablk[r * k + p]; },
                  b, c + i * n, accumulate);
  }
  for (; i < m; ++i) {
    const double* arow = a + i * k;
    gemm_panel<1>(n, k, [arow](int, std::size_t p) { return arow[p]; }, b,
                  c + i * n, accumulate);
  }
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a,
             const double* b, double* c, bool accumulate) {
  // Chunks of the reduction keep the streamed rows of b cache resident. Each
  // output still sums p in ascending order.
  constexpr std::size_t kChunk = 64;
  for (std::size_t p0 = 0; p0 < k || p0 == 0; p0 += kChunk) {
    const std::size_t kc = std::min(kChunk, k - p0);
    const bool acc = accumulate || p0 > 0;
    const double* ap = a + p0 * m;
    const double* bp = b + p0 * n;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
      const double* acol = ap + i;
      gemm_panel<4>(n, kc, [acol, m](int r, std::size_t p) { return acol[p * m + r]; },
                    bp, c + i * n, acc);
    }
    for (; i < m; ++i) {
      const double* acol = ap + i;
      gemm_panel<1>(n, kc, [acol, m](int, std::size_t p) { return acol[p * m]; }, bp,
                    c + i * n, acc);
    }
    if (k == 0) break;
  }
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void add(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void mul(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(std::size_t n, double s, const double* x, double* out) {
  const __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(sv, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = s * x[i];
}

void relu(std::size_t n, const double* x, double* out) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d keep = _mm256_cmp_pd(v, zero, _CMP_NLE_UQ);
    _mm256_storeu_pd(out + i, _mm256_and_pd(keep, v));
  }
  for (; i < n; ++i) out[i] = x[i] <= 0.0 ? 0.0 : x[i];
}

void relu_backward(std::size_t n, const double* x, const double* grad_out,
                   double* grad_in) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d keep = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    const __m256d g = _mm256_and_pd(keep, _mm256_loadu_pd(grad_out + i));
    _mm256_storeu_pd(grad_in + i, _mm256_add_pd(_mm256_loadu_pd(grad_in + i), g));
  }
  for (; i < n; ++i) grad_in[i] = grad_in[i] + (x[i] > 0.0 ? grad_out[i] : 0.0);
}

void spmm(std::size_t rows, const std::size_t* row_ptr, const std::size_t* col,
          const double* vals, const double* x, std::size_t width, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* orow = out + r * width;
    std::fill(orow, orow + width, 0.0);
    for (std::size_t e = row_ptr[r]; e < row_ptr[r + 1]; ++e)
      axpy(width, vals[e], x + col[e] * width, orow);
  }
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Isa::avx2, "avx2", gemm_nn, gemm_tn,
                                 axpy,      add,    mul,     scale,
                                 relu,      relu_backward,   spmm};
  return table;
}

}  // namespace gnnpool::simd
