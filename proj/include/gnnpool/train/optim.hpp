#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gnnpool/autodiff/tensor.hpp"

namespace gnnpool {

// Mean over the batch of -log softmax(logits)[label]. Throws ArgumentError for
// labels outside [0, classes).
Tensor cross_entropy_loss(const Tensor& logits, std::span<const std::size_t> labels);

struct StepSchedule {
  double initial = 0.01;
  double decay = 0.5;
  std::size_t step = 50;
};

// initial * decay^floor(epoch / step)
double lr_at_epoch(std::size_t epoch, const StepSchedule& schedule = {});

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t t = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

// Bias-corrected Adam update in place. Parameters without a gradient are
// treated as having a zero gradient. State is sized on first use.
void adam_step(AdamState& state, std::span<Tensor> params, double lr);

}  // namespace gnnpool
