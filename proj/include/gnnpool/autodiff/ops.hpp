#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "gnnpool/autodiff/tensor.hpp"

namespace gnnpool {

// Marks an absent row in gather_rows(); the output row is zero.
inline constexpr std::size_t kZeroRow = static_cast<std::size_t>(-1);

// a[m x k] * b[k x n]. dA = dC * B^T, dB = A^T * dC.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
// Subgradient at exactly 0 is 0.
Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);

// x[n x c] + b, where b holds c values, added to every row.
Tensor add_bias(const Tensor& x, const Tensor& bias);
// [a | b] along columns.
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor reshape(const Tensor& a, Shape shape);

// Sum of all entries, as a scalar.
Tensor sum(const Tensor& a);
// Per-row sums, [n x 1].
Tensor row_sum(const Tensor& a);
// x[i, :] * v[i] for v with one value per row.
Tensor scale_rows(const Tensor& x, const Tensor& v);
// x[:, j] * v[j] for v with one value per column.
Tensor scale_cols(const Tensor& x, const Tensor& v);
// v^(-1/2), with 0 where v == 0.
Tensor inv_sqrt_or_zero(const Tensor& v);
// 1/v, with 0 where v == 0.
Tensor reciprocal_or_zero(const Tensor& v);

// Softmax across each row with the row maximum subtracted first.
Tensor row_softmax(const Tensor& x);

// Rows of x in idx order. Backward scatters rows back, zero elsewhere.
Tensor index_select_rows(const Tensor& x, std::span<const std::size_t> idx);
// Like index_select_rows, but kZeroRow entries produce zero rows.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx);

// Indices of the k largest scores of an [m x 1] (or [m]) tensor. Ties go to
// the smaller index; the result is sorted ascending. Not differentiable.
std::vector<std::size_t> topk_indices(const Tensor& scores, std::size_t k);

// Row b of the result is the mean of the rows of x with segment[i] == b.
// Empty segments give a zero row.
Tensor segment_mean(const Tensor& x, std::span<const std::size_t> segment,
                    std::size_t num_segments);

// Places each row of s[n x m] into the column block of its segment:
// out[i, segment[i]*m + j] = s[i, j], out has num_segments*m columns.
Tensor block_columns(const Tensor& s, std::span<const std::size_t> segment,
                     std::size_t num_segments);

// Inverted dropout with keep probability 1 - rate.
Tensor dropout(const Tensor& x, double rate, std::mt19937_64& rng);

}  // namespace gnnpool
