#pragma once

// Data-parallel inner loops behind the autodiff ops.
//
// Every kernel exists as a scalar reference and (on x86-64) an AVX2 variant.
// Variants vectorize across output columns only, so each output element sees
// the same sequence of roundings as the scalar loop; the two are required to
// agree bit for bit. Neither uses fused multiply-add.

#include <cstddef>
#include <string_view>

namespace gnnpool::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  const char* name;

  // c[m x n] = a[m x k] * b[k x n]   (or += when accumulate)
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c, bool accumulate);
  // c[m x n] = a[k x m]^T * b[k x n] (or += when accumulate)
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a,
                  const double* b, double* c, bool accumulate);

  // y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  void (*add)(std::size_t n, const double* a, const double* b, double* out);
  void (*mul)(std::size_t n, const double* a, const double* b, double* out);
  void (*scale)(std::size_t n, double s, const double* x, double* out);
  void (*relu)(std::size_t n, const double* x, double* out);
  // grad_in += (x > 0 ? grad_out : 0)
  void (*relu_backward)(std::size_t n, const double* x, const double* grad_out,
                        double* grad_in);

  // CSR product: out[r, :] = sum over entries e of row r of vals[e] * x[col[e], :]
  void (*spmm)(std::size_t rows, const std::size_t* row_ptr,
               const std::size_t* col, const double* vals, const double* x,
               std::size_t width, double* out);
};

const KernelTable& scalar_kernels();

// nullptr when the build lacks AVX2 support or the running CPU does not have it.
const KernelTable* avx2_kernels();

// Table used by the library. Chosen once from the CPU, overridable with the
// GNNPOOL_ISA environment variable ("scalar", "avx2", "auto").
const KernelTable& active_kernels();

// Returns false (and leaves the selection unchanged) if isa is unavailable.
bool set_active_isa(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace gnnpool::simd
