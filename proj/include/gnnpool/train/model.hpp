#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "gnnpool/autodiff/tensor.hpp"
#include "gnnpool/graph/graph.hpp"
#include "gnnpool/nn/conv.hpp"
#include "gnnpool/nn/pool.hpp"
#include "gnnpool/train/hyperparams.hpp"

namespace gnnpool {

struct ModelShape {
  std::size_t input_width = 1;
  std::size_t num_classes = 2;
  std::size_t max_nodes = 1;  // largest graph the model will see; sizes SortPool and DiffPool
};

// Dense layer x W + b.
struct DenseLayer {
  Tensor weight;
  Tensor bias;

  static DenseLayer create(std::size_t in, std::size_t out, std::mt19937_64& rng);
  Tensor forward(const Tensor& x) const;
  std::vector<Tensor> parameters() const { return {weight, bias}; }
};

// conv stack -> pooling -> readout -> dense classifier.
//
// none, topk, sagpool, diffpool: global mean readout of the pooled nodes.
// sortpool: the k sorted rows of all concatenated layer outputs go through a
// width-C stride-C 1-D convolution with relu, are flattened and classified.
// hierarchical: one pooling operator after every conv layer (not sortpool).
class GraphClassifier {
 public:
  GraphClassifier(const HyperParams& hp, const ModelShape& shape, std::mt19937_64& rng);

  // Logits [num_graphs x classes]. Dropout is applied only when rng is given.
  Tensor forward(const GraphBatch& batch, std::mt19937_64* rng = nullptr) const;

  std::vector<Tensor> parameters() const;
  std::size_t parameter_count() const;

  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

  const HyperParams& hyperparams() const { return hp_; }
  const ModelShape& shape() const { return shape_; }
  const std::vector<ConvLayer>& convs() const { return convs_; }
  const DenseLayer& classifier() const { return dense_; }
  std::size_t sortpool_k() const { return sort_k_; }
  std::size_t diffpool_clusters(std::size_t level = 0) const { return diff_.at(level).clusters; }

 private:
  PoolResult pool_at(std::size_t level, const Tensor& x, const Topology& topology,
                     std::span<const std::size_t> seg, std::size_t num_graphs,
                     bool with_adjacency) const;

  HyperParams hp_;
  ModelShape shape_;
  std::vector<ConvLayer> convs_;
  std::vector<DiffPoolLayer> diff_;
  std::vector<TopkLayer> topk_;
  std::vector<SagLayer> sag_;
  std::size_t sort_k_ = 0;
  Tensor sort_weight_;  // [C x kernels]
  Tensor sort_bias_;
  DenseLayer dense_;
};

}  // namespace gnnpool
