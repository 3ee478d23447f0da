#include "gnnpool/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gnnpool/errors.hpp"
#include "gnnpool/simd/kernels.hpp"

namespace gnnpool {
namespace {

using detail::Node;
using simd::active_kernels;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

void require_matrix(const Tensor& a, const char* op) {
  if (!a.defined()) throw ArgumentError(std::string(op) + ": undefined tensor");
  if (a.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got shape " +
                         shape_string(a.shape()));
  }
}

std::vector<double> transposed(std::span<const double> v, std::size_t rows, std::size_t cols) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[j * rows + i] = v[i * cols + j];
  return out;
}

// Applies f to every element of one input; df gives d(out)/d(in) from (in, out).
template <typename F, typename DF>
Tensor unary(const Tensor& a, const char* op, F f, DF df) {
  std::vector<double> out(a.numel());
  const auto in = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return detail::make_result(a.shape(), std::move(out), op, {a}, [df](Node& self) {
    Node& p = *self.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] += self.grad[i] * df(p.values[i], self.values[i]);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner extents differ for " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()));
  }
  std::vector<double> out(m * n);
  active_kernels().gemm_nn(m, n, k, a.values().data(), b.values().data(), out.data(), false);
  return detail::make_result({m, n}, std::move(out), "matmul", {a, b}, [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const auto& kern = active_kernels();
    if (pa.requires_grad) {
      const auto bt = transposed(pb.values, k, n);
      kern.gemm_nn(m, k, n, self.grad.data(), bt.data(), pa.grad_buffer().data(), true);
    }
    if (pb.requires_grad)
      kern.gemm_tn(k, n, m, pa.values.data(), self.grad.data(), pb.grad_buffer().data(), true);
  });
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  const std::size_t r = a.rows(), c = a.cols();
  return detail::make_result({c, r}, transposed(a.values(), r, c), "transpose", {a},
                             [r, c](Node& self) {
                               Node& p = *self.parents[0];
                               if (!p.requires_grad) return;
                               const auto back = transposed(self.grad, c, r);
                               active_kernels().add(back.size(), p.grad_buffer().data(),
                                                    back.data(), p.grad_buffer().data());
                             });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  active_kernels().add(out.size(), a.values().data(), b.values().data(), out.data());
  return detail::make_result(a.shape(), std::move(out), "add", {a, b}, [](Node& self) {
    for (auto& parent : self.parents) {
      if (!parent->requires_grad) continue;
      auto& g = parent->grad_buffer();
      active_kernels().add(g.size(), g.data(), self.grad.data(), g.data());
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.numel());
  const auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return detail::make_result(a.shape(), std::move(out), "sub", {a, b}, [](Node& self) {
    const auto& kern = active_kernels();
    if (self.parents[0]->requires_grad) {
      auto& g = self.parents[0]->grad_buffer();
      kern.axpy(g.size(), 1.0, self.grad.data(), g.data());
    }
    if (self.parents[1]->requires_grad) {
      auto& g = self.parents[1]->grad_buffer();
      kern.axpy(g.size(), -1.0, self.grad.data(), g.data());
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.numel());
  active_kernels().mul(out.size(), a.values().data(), b.values().data(), out.data());
  return detail::make_result(a.shape(), std::move(out), "mul", {a, b}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const std::size_t n = self.grad.size();
    std::vector<double> tmp(n);
    const auto& kern = active_kernels();
    if (pa.requires_grad) {
      kern.mul(n, self.grad.data(), pb.values.data(), tmp.data());
      kern.add(n, pa.grad_buffer().data(), tmp.data(), pa.grad_buffer().data());
    }
    if (pb.requires_grad) {
      kern.mul(n, self.grad.data(), pa.values.data(), tmp.data());
      kern.add(n, pb.grad_buffer().data(), tmp.data(), pb.grad_buffer().data());
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.numel());
  active_kernels().scale(out.size(), s, a.values().data(), out.data());
  return detail::make_result(a.shape(), std::move(out), "scale", {a}, [s](Node& self) {
    Node& p = *self.parents[0];
    if (!p.requires_grad) return;
    active_kernels().axpy(self.grad.size(), s, self.grad.data(), p.grad_buffer().data());
  });
}

Tensor relu(const Tensor& a) {
  const auto in = a.values();
  if (KinkMonitor::active()) {
    for (double v : in) KinkMonitor::report(std::abs(v));
  }
  std::vector<double> out(in.size());
  active_kernels().relu(out.size(), in.data(), out.data());
  return detail::make_result(a.shape(), std::move(out), "relu", {a}, [](Node& self) {
    Node& p = *self.parents[0];
    if (!p.requires_grad) return;
    active_kernels().relu_backward(self.grad.size(), p.values.data(), self.grad.data(),
                                   p.grad_buffer().data());
  });
}

Tensor tanh(const Tensor& a) {
  return unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  require_matrix(x, "add_bias");
  const std::size_t r = x.rows(), c = x.cols();
  if (bias.numel() != c) {
    throw DimensionError("add_bias: bias " + shape_string(bias.shape()) + " for input " +
                         shape_string(x.shape()));
  }
  std::vector<double> out(x.numel());
  const auto& kern = active_kernels();
  for (std::size_t i = 0; i < r; ++i)
    kern.add(c, x.values().data() + i * c, bias.values().data(), out.data() + i * c);
  return detail::make_result(x.shape(), std::move(out), "add_bias", {x, bias},
                             [r, c](Node& self) {
                               const auto& k = active_kernels();
                               Node& px = *self.parents[0];
                               Node& pb = *self.parents[1];
                               if (px.requires_grad)
                                 k.add(self.grad.size(), px.grad_buffer().data(),
                                       self.grad.data(), px.grad_buffer().data());
                               if (pb.requires_grad) {
                                 auto& gb = pb.grad_buffer();
                                 for (std::size_t i = 0; i < r; ++i)
                                   k.add(c, gb.data(), self.grad.data() + i * c, gb.data());
                               }
                             });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_matrix(a, "concat_cols");
  require_matrix(b, "concat_cols");
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_cols: row counts differ for " + shape_string(a.shape()) +
                         " and " + shape_string(b.shape()));
  }
  const std::size_t r = a.rows(), ca = a.cols(), cb = b.cols(), c = ca + cb;
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    std::copy_n(a.values().data() + i * ca, ca, out.data() + i * c);
    std::copy_n(b.values().data() + i * cb, cb, out.data() + i * c + ca);
  }
  return detail::make_result({r, c}, std::move(out), "concat_cols", {a, b},
                             [r, ca, cb, c](Node& self) {
                               const auto& k = active_kernels();
                               Node& pa = *self.parents[0];
                               Node& pb = *self.parents[1];
                               for (std::size_t i = 0; i < r; ++i) {
                                 if (pa.requires_grad)
                                   k.add(ca, pa.grad_buffer().data() + i * ca,
                                         self.grad.data() + i * c, pa.grad_buffer().data() + i * ca);
                                 if (pb.requires_grad)
                                   k.add(cb, pb.grad_buffer().data() + i * cb,
                                         self.grad.data() + i * c + ca,
                                         pb.grad_buffer().data() + i * cb);
                               }
                             });
}

Tensor reshape(const Tensor& a, Shape shape) {
  const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                        std::multiplies<>());
  if (n != a.numel()) {
    throw DimensionError("reshape: " + shape_string(a.shape()) + " to " + shape_string(shape));
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  return detail::make_result(std::move(shape), std::move(out), "reshape", {a}, [](Node& self) {
    Node& p = *self.parents[0];
    if (!p.requires_grad) return;
    active_kernels().add(self.grad.size(), p.grad_buffer().data(), self.grad.data(),
                         p.grad_buffer().data());
  });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return detail::make_result({}, {s}, "sum", {a}, [](Node& self) {
    Node& p = *self.parents[0];
    if (!p.requires_grad) return;
    const double g = self.grad[0];
    for (double& v : p.grad_buffer()) v += g;
  });
}

Tensor row_sum(const Tensor& a) {
  require_matrix(a, "row_sum");
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i] += a.values()[i * c + j];
  return detail::make_result({r, 1}, std::move(out), "row_sum", {a}, [r, c](Node& self) {
    Node& p = *self.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += self.grad[i];
  });
}

Tensor scale_rows(const Tensor& x, const Tensor& v) {
  require_matrix(x, "scale_rows");
  const std::size_t r = x.rows(), c = x.cols();
  if (v.numel() != r) {
    throw DimensionError("scale_rows: " + shape_string(v.shape()) + " against " +
                         shape_string(x.shape()));
  }
  std::vector<double> out(r * c);
  const auto& kern = active_kernels();
  for (std::size_t i = 0; i < r; ++i)
    kern.scale(c, v.values()[i], x.values().data() + i * c, out.data() + i * c);
  return detail::make_result({r, c}, std::move(out), "scale_rows", {x, v}, [r, c](Node& self) {
    Node& px = *self.parents[0];
    Node& pv = *self.parents[1];
    const auto& k = active_kernels();
    for (std::size_t i = 0; i < r; ++i) {
      const double* gi = self.grad.data() + i * c;
      if (px.requires_grad) k.axpy(c, pv.values[i], gi, px.grad_buffer().data() + i * c);
      if (pv.requires_grad) {
        double dot = 0.0;
        for (std::size_t j = 0; j < c; ++j) dot += gi[j] * px.values[i * c + j];
        pv.grad_buffer()[i] += dot;
      }
    }
  });
}

Tensor scale_cols(const Tensor& x, const Tensor& v) {
  require_matrix(x, "scale_cols");
  const std::size_t r = x.rows(), c = x.cols();
  if (v.numel() != c) {
    throw DimensionError("scale_cols: " + shape_string(v.shape()) + " against " +
                         shape_string(x.shape()));
  }
  std::vector<double> out(r * c);
  const auto& kern = active_kernels();
  for (std::size_t i = 0; i < r; ++i)
    kern.mul(c, x.values().data() + i * c, v.values().data(), out.data() + i * c);
  return detail::make_result({r, c}, std::move(out), "scale_cols", {x, v}, [r, c](Node& self) {
    Node& px = *self.parents[0];
    Node& pv = *self.parents[1];
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        const double g = self.grad[i * c + j];
        if (px.requires_grad) px.grad_buffer()[i * c + j] += g * pv.values[j];
        if (pv.requires_grad) pv.grad_buffer()[j] += g * px.values[i * c + j];
      }
    }
  });
}

Tensor inv_sqrt_or_zero(const Tensor& v) {
  return unary(
      v, "inv_sqrt_or_zero", [](double x) { return x > 0.0 ? 1.0 / std::sqrt(x) : 0.0; },
      [](double, double y) { return -0.5 * y * y * y; });
}

Tensor reciprocal_or_zero(const Tensor& v) {
  return unary(
      v, "reciprocal_or_zero", [](double x) { return x != 0.0 ? 1.0 / x : 0.0; },
      [](double, double y) { return -y * y; });
}

Tensor row_softmax(const Tensor& x) {
  require_matrix(x, "row_softmax");
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    const double* in = x.values().data() + i * c;
    double* o = out.data() + i * c;
    const double mx = *std::max_element(in, in + c);
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) total += (o[j] = std::exp(in[j] - mx));
    for (std::size_t j = 0; j < c; ++j) o[j] /= total;
  }
  return detail::make_result({r, c}, std::move(out), "row_softmax", {x}, [r, c](Node& self) {
    Node& p = *self.parents[0];
    if (!p.requires_grad) return;
    auto& g = p.grad_buffer();
    for (std::size_t i = 0; i < r; ++i) {
      const double* y = self.values.data() + i * c;
      const double* gy = self.grad.data() + i * c;
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += gy[j] * y[j];
      for (std::size_t j = 0; j < c; ++j) g[i * c + j] += y[j] * (gy[j] - dot);
    }
  });
}

namespace {

Tensor gather_impl(const Tensor& x, std::span<const std::size_t> idx, bool allow_zero,
                   const char* op) {
  require_matrix(x, op);
  const std::size_t m = x.rows(), c = x.cols();
  for (std::size_t i : idx) {
    if (allow_zero && i == kZeroRow) continue;
    if (i >= m) {
      throw IndexError(std::string(op) + ": row " + std::to_string(i) + " outside " +
                       std::to_string(m) + " rows");
    }
  }
  std::vector<std::size_t> rows(idx.begin(), idx.end());
  std::vector<double> out(rows.size() * c, 0.0);
  for (std::size_t o = 0; o < rows.size(); ++o)
    if (rows[o] != kZeroRow) std::copy_n(x.values().data() + rows[o] * c, c, out.data() + o * c);
  const std::size_t n = rows.size();
  return detail::make_result({n, c}, std::move(out), op, {x},
                             [rows = std::move(rows), c](Node& self) {
                               Node& p = *self.parents[0];
                               if (!p.requires_grad) return;
                               auto& g = p.grad_buffer();
                               const auto& k = active_kernels();
                               for (std::size_t o = 0; o < rows.size(); ++o)
                                 if (rows[o] != kZeroRow)
                                   k.add(c, g.data() + rows[o] * c, self.grad.data() + o * c,
                                         g.data() + rows[o] * c);
                             });
}

}  // namespace

Tensor index_select_rows(const Tensor& x, std::span<const std::size_t> idx) {
  return gather_impl(x, idx, false, "index_select_rows");
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx) {
  return gather_impl(x, idx, true, "gather_rows");
}

std::vector<std::size_t> topk_indices(const Tensor& scores, std::size_t k) {
  const auto s = scores.values();
  const std::size_t m = s.size();
  if (scores.rank() == 2 && scores.cols() != 1) {
    throw DimensionError("topk_indices: scores must be a column, got " +
                         shape_string(scores.shape()));
  }
  if (k < 1 || k > m) {
    throw ArgumentError("topk_indices: k=" + std::to_string(k) + " outside [1, " +
                        std::to_string(m) + "]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  if (k < m && KinkMonitor::active()) KinkMonitor::report(s[order[k - 1]] - s[order[k]]);
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

Tensor segment_mean(const Tensor& x, std::span<const std::size_t> segment,
                    std::size_t num_segments) {
  require_matrix(x, "segment_mean");
  const std::size_t n = x.rows(), c = x.cols();
  if (segment.size() != n) {
    throw DimensionError("segment_mean: " + std::to_string(segment.size()) +
                         " segment ids for " + std::to_string(n) + " rows");
  }
  std::vector<double> counts(num_segments, 0.0);
  for (std::size_t s : segment) {
    if (s >= num_segments) throw IndexError("segment_mean: segment id out of range");
    counts[s] += 1.0;
  }
  std::vector<double> out(num_segments * c, 0.0);
  const auto& kern = active_kernels();
  for (std::size_t i = 0; i < n; ++i)
    kern.add(c, out.data() + segment[i] * c, x.values().data() + i * c,
             out.data() + segment[i] * c);
  for (std::size_t b = 0; b < num_segments; ++b)
    if (counts[b] > 0) kern.scale(c, 1.0 / counts[b], out.data() + b * c, out.data() + b * c);
  std::vector<std::size_t> seg(segment.begin(), segment.end());
  return detail::make_result(
      {num_segments, c}, std::move(out), "segment_mean", {x},
      [seg = std::move(seg), counts = std::move(counts), c](Node& self) {
        Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        auto& g = p.grad_buffer();
        const auto& k = active_kernels();
        for (std::size_t i = 0; i < seg.size(); ++i)
          k.axpy(c, 1.0 / counts[seg[i]], self.grad.data() + seg[i] * c, g.data() + i * c);
      });
}

Tensor block_columns(const Tensor& s, std::span<const std::size_t> segment,
                     std::size_t num_segments) {
  require_matrix(s, "block_columns");
  const std::size_t n = s.rows(), m = s.cols(), width = num_segments * m;
  if (segment.size() != n) throw DimensionError("block_columns: segment length mismatch");
  std::vector<double> out(n * width, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (segment[i] >= num_segments) throw IndexError("block_columns: segment id out of range");
    std::copy_n(s.values().data() + i * m, m, out.data() + i * width + segment[i] * m);
  }
  std::vector<std::size_t> seg(segment.begin(), segment.end());
  return detail::make_result({n, width}, std::move(out), "block_columns", {s},
                             [seg = std::move(seg), m, width](Node& self) {
                               Node& p = *self.parents[0];
                               if (!p.requires_grad) return;
                               auto& g = p.grad_buffer();
                               for (std::size_t i = 0; i < seg.size(); ++i)
                                 active_kernels().add(m, g.data() + i * m,
                                                      self.grad.data() + i * width + seg[i] * m,
                                                      g.data() + i * m);
                             });
}

Tensor dropout(const Tensor& x, double rate, std::mt19937_64& rng) {
  if (rate < 0.0 || rate >= 1.0) throw ArgumentError("dropout: rate must lie in [0, 1)");
  if (rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution keep(1.0 - rate);
  std::vector<double> mask(x.numel());
  for (double& m : mask) m = keep(rng) ? keep_scale : 0.0;
  std::vector<double> out(x.numel());
  active_kernels().mul(out.size(), x.values().data(), mask.data(), out.data());
  return detail::make_result(x.shape(), std::move(out), "dropout", {x},
                             [mask = std::move(mask)](Node& self) {
                               Node& p = *self.parents[0];
                               if (!p.requires_grad) return;
                               std::vector<double> tmp(mask.size());
                               const auto& k = active_kernels();
                               k.mul(tmp.size(), self.grad.data(), mask.data(), tmp.data());
                               k.add(tmp.size(), p.grad_buffer().data(), tmp.data(),
                                     p.grad_buffer().data());
                             });
}

}  // namespace gnnpool
