#include "gnnpool/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "gnnpool/errors.hpp"

namespace gnnpool {
namespace {

thread_local int no_grad_depth = 0;
thread_local double* kink_margin = nullptr;

std::size_t extent_product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::shared_ptr<detail::Node> new_leaf(Shape shape, std::vector<double> values,
                                       bool requires_grad) {
  if (extent_product(shape) != values.size()) {
    throw DimensionError("tensor of shape " + shape_string(shape) + " cannot hold " +
                         std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->requires_grad = requires_grad;
  return node;
}

const Shape& empty_shape() {
  static const Shape s{0};
  return s;
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "x" : "") << shape[i];
  out << ']';
  return out.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = extent_product(shape);
  return Tensor(new_leaf(std::move(shape), std::vector<double>(n, value), requires_grad));
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values, bool requires_grad) {
  return Tensor(new_leaf(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                      bool requires_grad) {
  return from_values({rows, cols}, std::move(values), requires_grad);
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows,
                      bool requires_grad) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    values.insert(values.end(), row.begin(), row.end());
  }
  return matrix(r, c, std::move(values), requires_grad);
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  const std::size_t n = values.size();
  return from_values({n}, std::move(values), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_values({}, {value}, requires_grad);
}

Tensor Tensor::identity(std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  return matrix(n, n, std::move(v));
}

const Shape& Tensor::shape() const { return node_ ? node_->shape : empty_shape(); }

std::size_t Tensor::numel() const { return node_ ? node_->values.size() : 0; }

std::size_t Tensor::rows() const {
  const Shape& s = shape();
  if (s.size() == 2) return s[0];
  if (s.size() > 2) throw DimensionError("matrix view of rank-" + std::to_string(s.size()) + " tensor");
  return 1;
}

std::size_t Tensor::cols() const {
  const Shape& s = shape();
  if (s.size() == 2) return s[1];
  if (s.size() == 1) return s[0];
  if (s.empty()) return 1;
  throw DimensionError("matrix view of rank-" + std::to_string(s.size()) + " tensor");
}

std::span<const double> Tensor::values() const {
  if (!node_) return {};
  return node_->values;
}

std::span<double> Tensor::mutable_values() {
  if (!node_) return {};
  return node_->values;
}

double Tensor::at(std::size_t r, std::size_t c) const {
  if (r >= rows() || c >= cols()) {
    throw IndexError("index (" + std::to_string(r) + "," + std::to_string(c) +
                     ") outside " + shape_string(shape()));
  }
  return node_->values[r * cols() + c];
}

double Tensor::item() const {
  if (numel() != 1) throw ArgumentError("item() on tensor of shape " + shape_string(shape()));
  return node_->values[0];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  if (!node_) throw ArgumentError("set_requires_grad on undefined tensor");
  if (!node_->is_leaf()) throw ArgumentError("set_requires_grad on non-leaf tensor");
  node_->requires_grad = flag;
}

bool Tensor::has_grad() const {
  return node_ && !node_->grad.empty() && node_->grad.size() == node_->values.size();
}

std::span<const double> Tensor::grad() const {
  if (!has_grad()) return {};
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.clear();
}

void Tensor::backward() const {
  if (!node_) throw ArgumentError("backward on undefined tensor");
  if (node_->values.size() != 1) {
    throw ArgumentError("backward requires a scalar loss, got shape " +
                        shape_string(node_->shape));
  }
  if (!node_->requires_grad) return;

  // Post-order DFS gives a topological order (parents before children).
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior gradients are per-pass; only leaves accumulate across passes.
  for (detail::Node* n : order)
    if (!n->is_leaf()) n->grad.clear();
  node_->grad_buffer()[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (!n->is_leaf()) {
      n->grad_buffer();
      n->backward(*n);
    }
  }
}

Tensor Tensor::detach() const {
  if (!node_) return {};
  return Tensor(new_leaf(node_->shape, node_->values, false));
}

const char* Tensor::op_name() const { return node_ ? node_->op : "undefined"; }

NoGradGuard::NoGradGuard() { ++no_grad_depth; }
NoGradGuard::~NoGradGuard() { --no_grad_depth; }

bool grad_enabled() { return no_grad_depth == 0; }

namespace detail {

Tensor make_result(Shape shape, std::vector<double> values, const char* op,
                   const std::vector<Tensor>& parents,
                   std::function<void(Node&)> backward) {
  auto node = new_leaf(std::move(shape), std::move(values), false);
  node->op = op;
  const bool track =
      grad_enabled() &&
      std::any_of(parents.begin(), parents.end(), [](const Tensor& t) { return t.requires_grad(); });
  if (track) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (const Tensor& p : parents) node->parents.push_back(p.node());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

Tensor make_result(Shape shape, std::vector<double> values, const char* op,
                   std::initializer_list<Tensor> parents,
                   std::function<void(Node&)> backward) {
  return make_result(std::move(shape), std::move(values), op,
                     std::vector<Tensor>(parents), std::move(backward));
}

}  // namespace detail

KinkMonitor::KinkMonitor() {
  reset();
}

KinkMonitor::~KinkMonitor() { kink_margin = nullptr; }

double KinkMonitor::min_margin() const { return kink_margin ? *kink_margin : 0.0; }

void KinkMonitor::reset() {
  static thread_local double storage;
  storage = std::numeric_limits<double>::infinity();
  kink_margin = &storage;
}

void KinkMonitor::report(double margin) {
  if (kink_margin) *kink_margin = std::min(*kink_margin, margin);
}

bool KinkMonitor::active() { return kink_margin != nullptr; }

}  // namespace gnnpool
