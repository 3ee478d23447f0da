#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "gnnpool/autodiff/tensor.hpp"
#include "gnnpool/graph/adjacency.hpp"
#include "gnnpool/nn/conv.hpp"

namespace gnnpool {

enum class PoolKind { none, sortpool, diffpool, topk, sagpool };

std::string_view pool_name(PoolKind kind);
PoolKind parse_pool(std::string_view name);

// Number of nodes to keep: a fraction of n (rounded up, at least 1) or a fixed count.
struct PoolSize {
  double ratio = 0.0;
  std::size_t count = 0;

  static PoolSize fraction(double ratio);
  static PoolSize fixed(std::size_t count);
  std::size_t resolve(std::size_t n) const;
};

// Output of a pooling operator. Operators accept a batch described by
// node_to_graph (nondecreasing, empty means one graph) and keep that layout.
struct PoolResult {
  Tensor x;
  std::optional<Adjacency> adjacency;
  std::vector<std::size_t> kept;  // node-selection provenance, ascending
  Tensor assignment;              // assignment provenance, [n x num_graphs*clusters]
  std::vector<std::size_t> node_to_graph;
  std::size_t num_graphs = 1;
};

// Orders each graph's nodes by the concatenated channels [x_prev_layers..., x_last],
// compared from the last channel backward (descending), then by node index.
// Keeps the first k rows per graph, zero-padding graphs with fewer than k nodes.
// Returns [num_graphs*k x C].
Tensor sort_pool(const Tensor& x_last, std::span<const Tensor> x_prev_layers, std::size_t k,
                 std::span<const std::size_t> node_to_graph = {}, std::size_t num_graphs = 1);

struct DiffPoolLayer {
  SageLayer embed;   // Z
  SageLayer assign;  // assignment logits
  std::size_t clusters = 1;

  static DiffPoolLayer create(std::size_t in, std::size_t out, std::size_t clusters,
                              std::mt19937_64& rng);
  std::vector<Tensor> parameters() const;
};

// Z = embed(x, A), S = row_softmax(assign(x, A)), x' = S^T Z, A' = S^T A S.
PoolResult diff_pool(const DiffPoolLayer& layer, const Tensor& x, const Topology& topology,
                     std::span<const std::size_t> node_to_graph = {}, std::size_t num_graphs = 1,
                     bool with_adjacency = true);
PoolResult diff_pool(const DiffPoolLayer& layer, const Tensor& x, const SparseMatrix& a);

// The product step of diff_pool for a given row-wise assignment s [n x clusters].
PoolResult assignment_pool(const Tensor& s, const Tensor& z, const Adjacency& a,
                           std::span<const std::size_t> node_to_graph = {},
                           std::size_t num_graphs = 1, bool with_adjacency = true);

struct TopkLayer {
  Tensor projection;  // [c x 1]
  PoolSize size;

  static TopkLayer create(std::size_t in, PoolSize size, std::mt19937_64& rng);
  std::vector<Tensor> parameters() const { return {projection}; }
};

// y = x p / |p|, keep top-k of y per graph, x' = (x * tanh(y))[kept], A' = A[kept, kept].
// Throws NumericError when |p| == 0.
PoolResult topk_pool(const TopkLayer& layer, const Tensor& x, const Topology& topology,
                     std::span<const std::size_t> node_to_graph = {}, std::size_t num_graphs = 1);
PoolResult topk_pool(const TopkLayer& layer, const Tensor& x, const SparseMatrix& a);

struct SagLayer {
  GcnLayer score;  // one output channel, identity activation
  PoolSize size;

  static SagLayer create(std::size_t in, PoolSize size, std::mt19937_64& rng);
  std::vector<Tensor> parameters() const { return score.parameters(); }
};

// y = GCN(x, A), keep top-k of y per graph, x' = (x * tanh(y))[kept], A' = A[kept, kept].
PoolResult sag_pool(const SagLayer& layer, const Tensor& x, const Topology& topology,
                    std::span<const std::size_t> node_to_graph = {}, std::size_t num_graphs = 1);
PoolResult sag_pool(const SagLayer& layer, const Tensor& x, const SparseMatrix& a);

// Row b is the mean of the rows of graph b. A graph with no rows gives a zero
// row and a logged warning.
Tensor global_mean_readout(const Tensor& x, std::span<const std::size_t> node_to_graph,
                           std::size_t num_graphs);

}  // namespace gnnpool
