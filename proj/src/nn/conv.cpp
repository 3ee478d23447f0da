#include "gnnpool/nn/conv.hpp"

#include <cmath>
#include <string>

#include "gnnpool/autodiff/ops.hpp"
#include "gnnpool/errors.hpp"

namespace gnnpool {
namespace {

void require_input(const Tensor& x, std::size_t channels, std::size_t nodes, const char* op) {
  if (x.rank() != 2 || x.cols() != channels || x.rows() != nodes) {
    throw DimensionError(std::string(op) + ": input " + shape_string(x.shape()) + " for " +
                         std::to_string(nodes) + " nodes and " + std::to_string(channels) +
                         " channels");
  }
}

Tensor finish(Tensor h, const Tensor& bias, Activation activation) {
  if (bias.defined()) h = add_bias(h, bias);
  return activate(h, activation);
}

std::vector<Tensor> with_bias(std::vector<Tensor> params, const Tensor& bias) {
  if (bias.defined()) params.push_back(bias);
  return params;
}

}  // namespace

std::string_view conv_name(ConvKind kind) {
  switch (kind) {
    case ConvKind::gcn: return "gcn";
    case ConvKind::sage: return "sage";
    case ConvKind::tagcn: return "tagcn";
  }
  return "?";
}

ConvKind parse_conv(std::string_view name) {
  if (name == "gcn") return ConvKind::gcn;
  if (name == "sage") return ConvKind::sage;
  if (name == "tagcn") return ConvKind::tagcn;
  throw ArgumentError("unknown conv kind '" + std::string(name) + "' (expected gcn, sage, tagcn)");
}

Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> v(rows * cols);
  for (double& x : v) x = dist(rng);
  return Tensor::matrix(rows, cols, std::move(v), true);
}

Tensor activate(const Tensor& x, Activation activation) {
  return activation == Activation::relu ? relu(x) : x;
}

GcnLayer GcnLayer::create(std::size_t in, std::size_t out, std::mt19937_64& rng,
                          Activation activation) {
  return {glorot_uniform(in, out, rng), Tensor::zeros({out}, true), activation};
}

std::vector<Tensor> GcnLayer::parameters() const { return with_bias({weight}, bias); }

SageLayer SageLayer::create(std::size_t in, std::size_t out, std::mt19937_64& rng,
                            Activation activation) {
  return {glorot_uniform(2 * in, out, rng), Tensor::zeros({out}, true), activation};
}

std::vector<Tensor> SageLayer::parameters() const { return with_bias({weight}, bias); }

TagcnLayer TagcnLayer::create(std::size_t in, std::size_t out, std::size_t order,
                              std::mt19937_64& rng, Activation activation) {
  TagcnLayer layer;
  for (std::size_t i = 0; i <= order; ++i) layer.weights.push_back(glorot_uniform(in, out, rng));
  layer.bias = Tensor::zeros({out}, true);
  layer.activation = activation;
  return layer;
}

std::vector<Tensor> TagcnLayer::parameters() const { return with_bias(weights, bias); }

Tensor gcn_forward(const GcnLayer& layer, const Adjacency& a_norm, const Tensor& x) {
  require_input(x, layer.in_channels(), a_norm.size(), "gcn_forward");
  // Multiply by the narrower side first.
  Tensor h = layer.out_channels() < layer.in_channels()
                 ? a_norm.apply(matmul(x, layer.weight))
                 : matmul(a_norm.apply(x), layer.weight);
  return finish(std::move(h), layer.bias, layer.activation);
}

Tensor gcn_forward(const GcnLayer& layer, const SparseMatrix& a_norm, const Tensor& x) {
  return gcn_forward(layer, Adjacency(a_norm), x);
}

Tensor sage_forward(const SageLayer& layer, const Adjacency& mean_adj, const Tensor& x) {
  if (layer.weight.rows() % 2 != 0) throw DimensionError("sage_forward: weight rows must be 2c");
  require_input(x, layer.in_channels(), mean_adj.size(), "sage_forward");
  const Tensor h = matmul(concat_cols(x, mean_adj.apply(x)), layer.weight);
  return finish(h, layer.bias, layer.activation);
}

Tensor sage_forward(const SageLayer& layer, const SparseMatrix& a, const Tensor& x) {
  return sage_forward(layer, Adjacency(normalize_mean(a)), x);
}

Tensor tagcn_forward(const TagcnLayer& layer, const Adjacency& a_norm, const Tensor& x) {
  if (layer.weights.empty()) throw ArgumentError("tagcn_forward: layer has no weights");
  for (const Tensor& w : layer.weights) {
    if (w.shape() != layer.weights.front().shape())
      throw DimensionError("tagcn_forward: weight matrices differ in shape");
  }
  require_input(x, layer.in_channels(), a_norm.size(), "tagcn_forward");
  Tensor h = matmul(x, layer.weights[0]);
  Tensor power = x;
  for (std::size_t i = 1; i < layer.weights.size(); ++i) {
    power = a_norm.apply(power);
    h = add(h, matmul(power, layer.weights[i]));
  }
  return finish(std::move(h), layer.bias, layer.activation);
}

Tensor tagcn_forward(const TagcnLayer& layer, const SparseMatrix& a_norm, const Tensor& x) {
  return tagcn_forward(layer, Adjacency(a_norm), x);
}

ConvLayer::ConvLayer(ConvKind kind, std::size_t in, std::size_t out, std::size_t order,
                     std::mt19937_64& rng, Activation activation)
    : kind_(kind) {
  switch (kind) {
    case ConvKind::gcn: gcn_ = GcnLayer::create(in, out, rng, activation); break;
    case ConvKind::sage: sage_ = SageLayer::create(in, out, rng, activation); break;
    case ConvKind::tagcn: tagcn_ = TagcnLayer::create(in, out, order, rng, activation); break;
  }
}

Tensor ConvLayer::forward(const Topology& topology, const Tensor& x) const {
  switch (kind_) {
    case ConvKind::gcn: return gcn_forward(gcn_, topology.get(Normalization::gcn), x);
    case ConvKind::sage: return sage_forward(sage_, topology.get(Normalization::mean), x);
    case ConvKind::tagcn: return tagcn_forward(tagcn_, topology.get(Normalization::tagcn), x);
  }
  throw ArgumentError("unknown conv kind");
}

std::vector<Tensor> ConvLayer::parameters() const {
  switch (kind_) {
    case ConvKind::gcn: return gcn_.parameters();
    case ConvKind::sage: return sage_.parameters();
    case ConvKind::tagcn: return tagcn_.parameters();
  }
  return {};
}

std::size_t ConvLayer::out_channels() const {
  switch (kind_) {
    case ConvKind::gcn: return gcn_.out_channels();
    case ConvKind::sage: return sage_.out_channels();
    case ConvKind::tagcn: return tagcn_.out_channels();
  }
  return 0;
}

}  // namespace gnnpool
