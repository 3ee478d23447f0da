#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gnnpool/autodiff/tensor.hpp"

namespace gradcheck {

inline constexpr double kStep = 1e-5;
inline constexpr double kTolerance = 1e-4;
// Samples whose forward pass comes closer than this to a relu/top-k/sort
// boundary are redrawn by the caller.
inline constexpr double kMinKinkMargin = 1e-4;
// Denominator floor for gradients that are themselves ~0.
inline constexpr double kFloor = 1e-6;

struct Result {
  double max_rel_error = 0.0;
  double kink_margin = INFINITY;
  std::size_t checked = 0;
  bool any_nonzero = false;

  bool on_kink() const { return kink_margin < kMinKinkMargin; }
  bool passed() const { return max_rel_error < kTolerance; }
};

inline double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), kFloor});
}

// Compares analytic gradients of loss_fn() w.r.t. params against central
// differences, perturbing every entry of every param.
inline Result check(const std::function<gnnpool::Tensor()>& loss_fn,
                    std::vector<gnnpool::Tensor> params, double step = kStep) {
  Result r;
  gnnpool::KinkMonitor monitor;
  for (auto& p : params) p.zero_grad();
  gnnpool::Tensor loss = loss_fn();
  loss.backward();
  for (auto& p : params) {
    std::vector<double> analytic(p.numel(), 0.0);
    if (p.has_grad()) std::copy(p.grad().begin(), p.grad().end(), analytic.begin());
    auto v = p.mutable_values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double saved = v[i];
      v[i] = saved + step;
      const double plus = loss_fn().item();
      v[i] = saved - step;
      const double minus = loss_fn().item();
      v[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      r.max_rel_error = std::max(r.max_rel_error, rel_error(analytic[i], numeric));
      r.any_nonzero = r.any_nonzero || std::abs(analytic[i]) > 1e-8;
      ++r.checked;
    }
  }
  r.kink_margin = monitor.min_margin();
  return r;
}

}  // namespace gradcheck
