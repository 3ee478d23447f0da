#include "gnnpool/train/model.hpp"

#include "gnnpool/autodiff/ops.hpp"
#include "gnnpool/errors.hpp"
#include "gnnpool/graph/adjacency.hpp"

namespace gnnpool {

DenseLayer DenseLayer::create(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  DenseLayer d;
  d.weight = glorot_uniform(in, out, rng);
  d.bias = Tensor::zeros({out});
  d.bias.set_requires_grad(true);
  return d;
}

Tensor DenseLayer::forward(const Tensor& x) const { return add_bias(matmul(x, weight), bias); }

GraphClassifier::GraphClassifier(const HyperParams& hp, const ModelShape& shape,
                                 std::mt19937_64& rng)
    : hp_(hp), shape_(shape) {
  hp.validate();
  if (shape.input_width < 1 || shape.num_classes < 1 || shape.max_nodes < 1)
    throw ArgumentError("GraphClassifier: empty model shape");
  if (hp.hierarchical && hp.pool == PoolKind::sortpool)
    throw ArgumentError("GraphClassifier: sortpool cannot be hierarchical");

  const std::size_t c = hp.hidden_channels;
  const std::size_t levels =
      hp.pool == PoolKind::none || hp.pool == PoolKind::sortpool ? 0
      : hp.hierarchical                                          ? hp.num_conv_layers
                                                                 : 1;
  std::size_t in = shape.input_width;
  std::size_t nodes = shape.max_nodes;
  for (std::size_t l = 0; l < hp.num_conv_layers; ++l) {
    convs_.emplace_back(hp.conv, in, c, hp.poly_order, rng);
    in = c;
    const bool pool_here = hp.hierarchical ? l < levels : (levels == 1 && l + 1 == hp.num_conv_layers);
    if (!pool_here) continue;
    switch (hp.pool) {
      case PoolKind::diffpool: {
        const std::size_t clusters = hp.pool_size().resolve(nodes);
        diff_.push_back(DiffPoolLayer::create(c, c, clusters, rng));
        nodes = clusters;
        break;
      }
      case PoolKind::topk:
        topk_.push_back(TopkLayer::create(c, hp.pool_size(), rng));
        break;
      case PoolKind::sagpool:
        sag_.push_back(SagLayer::create(c, hp.pool_size(), rng));
        break;
      default:
        break;
    }
  }

  if (hp.pool == PoolKind::sortpool) {
    sort_k_ = hp.pool_size().resolve(shape.max_nodes);
    const std::size_t width = c * hp.num_conv_layers;
    sort_weight_ = glorot_uniform(width, hp.sortpool_kernels, rng);
    sort_bias_ = Tensor::zeros({hp.sortpool_kernels});
    sort_bias_.set_requires_grad(true);
    dense_ = DenseLayer::create(sort_k_ * hp.sortpool_kernels, shape.num_classes, rng);
  } else {
    dense_ = DenseLayer::create(c, shape.num_classes, rng);
  }
}

PoolResult GraphClassifier::pool_at(std::size_t level, const Tensor& x, const Topology& topology,
                                    std::span<const std::size_t> seg, std::size_t num_graphs,
                                    bool with_adjacency) const {
  switch (hp_.pool) {
    case PoolKind::diffpool:
      return diff_pool(diff_[level], x, topology, seg, num_graphs, with_adjacency);
    case PoolKind::topk:
      return topk_pool(topk_[level], x, topology, seg, num_graphs);
    case PoolKind::sagpool:
      return sag_pool(sag_[level], x, topology, seg, num_graphs);
    default:
      throw ArgumentError("pool_at: no pooling operator");
  }
}

Tensor GraphClassifier::forward(const GraphBatch& batch, std::mt19937_64* rng) const {
  if (batch.features.cols() != shape_.input_width) {
    throw DimensionError("GraphClassifier: feature width " + std::to_string(batch.features.cols()) +
                         ", model expects " + std::to_string(shape_.input_width));
  }
  const std::size_t num_graphs = batch.num_graphs();
  Topology topology = Topology::from_batch(batch);
  std::vector<std::size_t> seg = batch.node_to_graph;
  Tensor x = batch.features;
  std::vector<Tensor> outputs;
  std::size_t level = 0;

  for (std::size_t l = 0; l < convs_.size(); ++l) {
    x = convs_[l].forward(topology, x);
    if (rng && hp_.dropout > 0.0) x = dropout(x, hp_.dropout, *rng);
    if (hp_.pool == PoolKind::sortpool) outputs.push_back(x);

    const bool last = l + 1 == convs_.size();
    const bool pool_here =
        hp_.pool != PoolKind::none && hp_.pool != PoolKind::sortpool && (hp_.hierarchical || last);
    if (!pool_here) continue;
    PoolResult pooled = pool_at(level++, x, topology, seg, num_graphs, !last);
    x = pooled.x;
    seg = std::move(pooled.node_to_graph);
    if (!last) topology = Topology(std::move(*pooled.adjacency));
  }

  if (hp_.pool == PoolKind::sortpool) {
    const Tensor x_last = outputs.back();
    outputs.pop_back();
    Tensor sorted = sort_pool(x_last, outputs, sort_k_, seg, num_graphs);
    Tensor h = relu(add_bias(matmul(sorted, sort_weight_), sort_bias_));
    h = reshape(h, {num_graphs, sort_k_ * hp_.sortpool_kernels});
    return dense_.forward(h);
  }
  return dense_.forward(global_mean_readout(x, seg, num_graphs));
}

std::vector<Tensor> GraphClassifier::parameters() const {
  std::vector<Tensor> out;
  const auto append = [&out](const std::vector<Tensor>& ps) {
    out.insert(out.end(), ps.begin(), ps.end());
  };
  for (const ConvLayer& c : convs_) append(c.parameters());
  for (const DiffPoolLayer& d : diff_) append(d.parameters());
  for (const TopkLayer& t : topk_) append(t.parameters());
  for (const SagLayer& s : sag_) append(s.parameters());
  if (hp_.pool == PoolKind::sortpool) append({sort_weight_, sort_bias_});
  append(dense_.parameters());
  return out;
}

std::size_t GraphClassifier::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& p : parameters()) n += p.numel();
  return n;
}

std::vector<std::vector<double>> GraphClassifier::snapshot() const {
  std::vector<std::vector<double>> out;
  for (const Tensor& p : parameters()) out.emplace_back(p.values().begin(), p.values().end());
  return out;
}

void GraphClassifier::restore(const std::vector<std::vector<double>>& values) {
  auto params = parameters();
  if (values.size() != params.size()) throw DimensionError("restore: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto dst = params[i].mutable_values();
    if (dst.size() != values[i].size()) throw DimensionError("restore: parameter shape mismatch");
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

}  // namespace gnnpool
