#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gnnpool {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

namespace detail {

// One recorded value. Results of ops hold their parents and a backward rule
// that reads `grad` and accumulates into the parents' grads.
struct Node {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until something is accumulated
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  bool is_leaf() const { return !backward; }

  std::vector<double>& grad_buffer() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

// Dense row-major array of doubles with an optional gradient.
//
// Tensor is a shared handle: copies alias the same storage and history. Every
// op applied to tensors that require gradients records its inputs, so the tape
// is rebuilt on each forward pass and released with the last handle.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_values(Shape shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values, bool requires_grad = false);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows,
                       bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor identity(std::size_t n);

  bool defined() const { return node_ != nullptr; }

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  // Matrix view: rank-2 uses (shape[0], shape[1]); rank-1 is a single row;
  // rank-0 is 1x1.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const;
  // In-place access for optimizers and initializers. Not recorded.
  std::span<double> mutable_values();
  double at(std::size_t r, std::size_t c) const;
  double item() const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  std::span<const double> grad() const;
  void zero_grad();

  // Seeds d(this)/d(this) = 1 and propagates to every reachable tensor that
  // requires gradients. Leaf gradients accumulate across calls.
  void backward() const;

  // Same values, no history, no gradient.
  Tensor detach() const;

  const char* op_name() const;

  // Internal: used by op implementations.
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// Disables recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;
};

bool grad_enabled();

namespace detail {

// Builds an op result. The backward rule is kept only if recording is enabled
// and at least one parent requires gradients.
Tensor make_result(Shape shape, std::vector<double> values, const char* op,
                   std::initializer_list<Tensor> parents,
                   std::function<void(Node&)> backward);

Tensor make_result(Shape shape, std::vector<double> values, const char* op,
                   const std::vector<Tensor>& parents,
                   std::function<void(Node&)> backward);

}  // namespace detail

// Tracks how close the current thread's forward pass came to a point where an
// op is non-differentiable (relu at 0, a top-k or sort boundary). Gradient
// checks use it to reject samples that sit on a kink.
class KinkMonitor {
 public:
  KinkMonitor();
  ~KinkMonitor();
  KinkMonitor(const KinkMonitor&) = delete;
  KinkMonitor& operator=(const KinkMonitor&) = delete;

  double min_margin() const;
  void reset();

  static void report(double margin);
  static bool active();
};

}  // namespace gnnpool
