#include "gnnpool/train/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gnnpool/errors.hpp"

namespace gnnpool {

Tensor cross_entropy_loss(const Tensor& logits, std::span<const std::size_t> labels) {
  if (logits.rank() != 2 || logits.rows() != labels.size()) {
    throw DimensionError("cross_entropy_loss: logits " + shape_string(logits.shape()) + " for " +
                         std::to_string(labels.size()) + " labels");
  }
  const std::size_t b = logits.rows(), c = logits.cols();
  for (std::size_t label : labels) {
    if (label >= c) {
      throw ArgumentError("cross_entropy_loss: label " + std::to_string(label) + " outside [0, " +
                          std::to_string(c) + ")");
    }
  }
  std::vector<double> probs(b * c);
  double loss = 0.0;
  const auto z = logits.values();
  for (std::size_t i = 0; i < b; ++i) {
    const double* row = z.data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) total += (probs[i * c + j] = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] /= total;
    loss += -(row[labels[i]] - mx - std::log(total));
  }
  loss /= static_cast<double>(b);
  std::vector<std::size_t> targets(labels.begin(), labels.end());
  return detail::make_result(
      {}, {loss}, "cross_entropy", {logits},
      [probs = std::move(probs), targets = std::move(targets), b, c](detail::Node& self) {
        detail::Node& p = *self.parents[0];
        if (!p.requires_grad) return;
        auto& g = p.grad_buffer();
        const double scale = self.grad[0] / static_cast<double>(b);
        for (std::size_t i = 0; i < b; ++i)
          for (std::size_t j = 0; j < c; ++j)
            g[i * c + j] += scale * (probs[i * c + j] - (j == targets[i] ? 1.0 : 0.0));
      });
}

double lr_at_epoch(std::size_t epoch, const StepSchedule& schedule) {
  return schedule.initial *
         std::pow(schedule.decay, static_cast<double>(epoch / std::max<std::size_t>(schedule.step, 1)));
}

void adam_step(AdamState& state, std::span<Tensor> params, double lr) {
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), {});
    state.v.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i].numel(), 0.0);
      state.v[i].assign(params[i].numel(), 0.0);
    }
  }
  ++state.t;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto w = params[i].mutable_values();
    const auto g = params[i].grad();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = g.empty() ? 0.0 : g[j];
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * gj;
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * gj * gj;
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      w[j] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace gnnpool
