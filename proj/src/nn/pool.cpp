#include "gnnpool/nn/pool.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gnnpool/autodiff/ops.hpp"
#include "gnnpool/errors.hpp"
#include "gnnpool/log.hpp"

namespace gnnpool {
namespace {

std::vector<std::size_t> resolve_segments(std::span<const std::size_t> node_to_graph,
                                          std::size_t n, std::size_t num_graphs) {
  if (node_to_graph.empty()) {
    if (num_graphs != 1) throw ArgumentError("node_to_graph required for a batch");
    return std::vector<std::size_t>(n, 0);
  }
  if (node_to_graph.size() != n) {
    throw DimensionError("node_to_graph has " + std::to_string(node_to_graph.size()) +
                         " entries for " + std::to_string(n) + " nodes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (node_to_graph[i] >= num_graphs) throw IndexError("node_to_graph entry out of range");
    if (i > 0 && node_to_graph[i] < node_to_graph[i - 1])
      throw ValidationError("node_to_graph must be nondecreasing");
  }
  return {node_to_graph.begin(), node_to_graph.end()};
}

std::vector<std::size_t> segment_offsets(const std::vector<std::size_t>& seg,
                                         std::size_t num_graphs) {
  std::vector<std::size_t> offsets(num_graphs + 1, 0);
  for (std::size_t s : seg) ++offsets[s + 1];
  for (std::size_t b = 0; b < num_graphs; ++b) offsets[b + 1] += offsets[b];
  return offsets;
}

Adjacency select_adjacency(const Adjacency& a, const std::vector<std::size_t>& kept) {
  if (a.is_sparse()) return Adjacency(a.sparse().principal_submatrix(kept));
  // A[kept, kept] through two row gathers.
  const Tensor rows = index_select_rows(a.dense(), kept);
  const Tensor both = index_select_rows(transpose(rows), kept);
  return Adjacency(transpose(both));
}

PoolResult select_gated(const Tensor& x, const Tensor& scores, const Topology& topology,
                        const std::vector<std::size_t>& seg, std::size_t num_graphs,
                        PoolSize size) {
  const auto offsets = segment_offsets(seg, num_graphs);
  const auto y = scores.values();
  PoolResult out;
  for (std::size_t b = 0; b < num_graphs; ++b) {
    const std::size_t lo = offsets[b], n = offsets[b + 1] - lo;
    if (n == 0) continue;
    const Tensor local = Tensor::matrix(n, 1, std::vector<double>(y.begin() + lo, y.begin() + lo + n));
    for (std::size_t i : topk_indices(local, size.resolve(n))) out.kept.push_back(lo + i);
  }
  const Tensor gated = scale_rows(x, tanh(scores));
  out.x = index_select_rows(gated, out.kept);
  out.adjacency = select_adjacency(topology.raw(), out.kept);
  out.num_graphs = num_graphs;
  out.node_to_graph.reserve(out.kept.size());
  for (std::size_t i : out.kept) out.node_to_graph.push_back(seg[i]);
  return out;
}

void require_rows(const Tensor& x, std::size_t n, const char* op) {
  if (x.rank() != 2 || x.rows() != n) {
    throw DimensionError(std::string(op) + ": features " + shape_string(x.shape()) + " for " +
                         std::to_string(n) + " nodes");
  }
}

}  // namespace

std::string_view pool_name(PoolKind kind) {
  switch (kind) {
    case PoolKind::none: return "none";
    case PoolKind::sortpool: return "sortpool";
    case PoolKind::diffpool: return "diffpool";
    case PoolKind::topk: return "topk";
    case PoolKind::sagpool: return "sagpool";
  }
  return "?";
}

PoolKind parse_pool(std::string_view name) {
  for (PoolKind k : {PoolKind::none, PoolKind::sortpool, PoolKind::diffpool, PoolKind::topk,
                     PoolKind::sagpool})
    if (pool_name(k) == name) return k;
  throw ArgumentError("unknown pool kind '" + std::string(name) +
                      "' (expected none, sortpool, diffpool, topk, sagpool)");
}

PoolSize PoolSize::fraction(double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ArgumentError("pool ratio must lie in (0, 1]");
  return {ratio, 0};
}

PoolSize PoolSize::fixed(std::size_t count) {
  if (count < 1) throw ArgumentError("pool size must be at least 1");
  return {0.0, count};
}

std::size_t PoolSize::resolve(std::size_t n) const {
  if (count > 0) return count;
  const auto k = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

Tensor sort_pool(const Tensor& x_last, std::span<const Tensor> x_prev_layers, std::size_t k,
                 std::span<const std::size_t> node_to_graph, std::size_t num_graphs) {
  if (k < 1) throw ArgumentError("sort_pool: k must be at least 1");
  const std::size_t n = x_last.rows();
  require_rows(x_last, n, "sort_pool");
  Tensor all;
  for (const Tensor& t : x_prev_layers) {
    require_rows(t, n, "sort_pool");
    all = all.defined() ? concat_cols(all, t) : t;
  }
  all = all.defined() ? concat_cols(all, x_last) : x_last;

  const auto seg = resolve_segments(node_to_graph, n, num_graphs);
  const auto offsets = segment_offsets(seg, num_graphs);
  const std::size_t width = all.cols();
  const auto v = all.values();
  // Descending by channels from last to first; equal rows fall back to node index.
  auto before = [&](std::size_t a, std::size_t b) {
    for (std::size_t j = width; j-- > 0;) {
      const double va = v[a * width + j], vb = v[b * width + j];
      if (va != vb) return va > vb;
    }
    return a < b;
  };

  std::vector<std::size_t> idx;
  idx.reserve(num_graphs * k);
  for (std::size_t b = 0; b < num_graphs; ++b) {
    std::vector<std::size_t> order(offsets[b + 1] - offsets[b]);
    std::iota(order.begin(), order.end(), offsets[b]);
    std::sort(order.begin(), order.end(), before);
    if (KinkMonitor::active()) {
      const std::size_t checked = std::min(order.size(), k + 1);
      for (std::size_t i = 1; i < checked; ++i)
        KinkMonitor::report(v[order[i - 1] * width + width - 1] - v[order[i] * width + width - 1]);
    }
    order.resize(k, kZeroRow);
    idx.insert(idx.end(), order.begin(), order.end());
  }
  return gather_rows(all, idx);
}

DiffPoolLayer DiffPoolLayer::create(std::size_t in, std::size_t out, std::size_t clusters,
                                    std::mt19937_64& rng) {
  if (clusters < 1) throw ArgumentError("diff_pool: cluster count must be at least 1");
  DiffPoolLayer layer;
  layer.embed = SageLayer::create(in, out, rng, Activation::relu);
  layer.assign = SageLayer::create(in, clusters, rng, Activation::identity);
  layer.clusters = clusters;
  return layer;
}

std::vector<Tensor> DiffPoolLayer::parameters() const {
  auto params = embed.parameters();
  for (const Tensor& t : assign.parameters()) params.push_back(t);
  return params;
}

PoolResult assignment_pool(const Tensor& s, const Tensor& z, const Adjacency& a,
                           std::span<const std::size_t> node_to_graph, std::size_t num_graphs,
                           bool with_adjacency) {
  const std::size_t n = a.size();
  require_rows(s, n, "assignment_pool");
  require_rows(z, n, "assignment_pool");
  const auto seg = resolve_segments(node_to_graph, n, num_graphs);
  const std::size_t clusters = s.cols();
  const Tensor blocked = num_graphs == 1 ? s : block_columns(s, seg, num_graphs);
  const Tensor st = transpose(blocked);

  PoolResult out;
  out.x = matmul(st, z);
  if (with_adjacency) out.adjacency = Adjacency(matmul(st, a.apply(blocked)));
  out.assignment = blocked;
  out.num_graphs = num_graphs;
  out.node_to_graph.reserve(num_graphs * clusters);
  for (std::size_t b = 0; b < num_graphs; ++b) out.node_to_graph.insert(out.node_to_graph.end(), clusters, b);
  return out;
}

PoolResult diff_pool(const DiffPoolLayer& layer, const Tensor& x, const Topology& topology,
                     std::span<const std::size_t> node_to_graph, std::size_t num_graphs,
                     bool with_adjacency) {
  const Adjacency& mean_adj = topology.get(Normalization::mean);
  const Tensor z = sage_forward(layer.embed, mean_adj, x);
  const Tensor s = row_softmax(sage_forward(layer.assign, mean_adj, x));
  return assignment_pool(s, z, topology.raw(), node_to_graph, num_graphs, with_adjacency);
}

PoolResult diff_pool(const DiffPoolLayer& layer, const Tensor& x, const SparseMatrix& a) {
  return diff_pool(layer, x, Topology(Adjacency(a)));
}

TopkLayer TopkLayer::create(std::size_t in, PoolSize size, std::mt19937_64& rng) {
  return {glorot_uniform(in, 1, rng), size};
}

PoolResult topk_pool(const TopkLayer& layer, const Tensor& x, const Topology& topology,
                     std::span<const std::size_t> node_to_graph, std::size_t num_graphs) {
  const std::size_t n = topology.raw().size();
  require_rows(x, n, "topk_pool");
  const Tensor& p = layer.projection;
  if (p.numel() != x.cols()) {
    throw DimensionError("topk_pool: projection " + shape_string(p.shape()) + " for features " +
                         shape_string(x.shape()));
  }
  double norm_sq = 0.0;
  for (double v : p.values()) norm_sq += v * v;
  if (!(norm_sq > 0.0)) throw NumericError("topk_pool: projection vector has zero norm");

  const Tensor p_col = p.rank() == 2 ? p : reshape(p, {p.numel(), 1});
  const Tensor inv_norm = inv_sqrt_or_zero(sum(mul(p_col, p_col)));
  const Tensor scores = scale_cols(matmul(x, p_col), inv_norm);
  const auto seg = resolve_segments(node_to_graph, n, num_graphs);
  return select_gated(x, scores, topology, seg, num_graphs, layer.size);
}

PoolResult topk_pool(const TopkLayer& layer, const Tensor& x, const SparseMatrix& a) {
  return topk_pool(layer, x, Topology(Adjacency(a)));
}

SagLayer SagLayer::create(std::size_t in, PoolSize size, std::mt19937_64& rng) {
  return {GcnLayer::create(in, 1, rng, Activation::identity), size};
}

PoolResult sag_pool(const SagLayer& layer, const Tensor& x, const Topology& topology,
                    std::span<const std::size_t> node_to_graph, std::size_t num_graphs) {
  const std::size_t n = topology.raw().size();
  require_rows(x, n, "sag_pool");
  if (layer.score.out_channels() != 1)
    throw DimensionError("sag_pool: score layer must have one output channel");
  const Tensor scores = gcn_forward(layer.score, topology.get(Normalization::gcn), x);
  const auto seg = resolve_segments(node_to_graph, n, num_graphs);
  return select_gated(x, scores, topology, seg, num_graphs, layer.size);
}

PoolResult sag_pool(const SagLayer& layer, const Tensor& x, const SparseMatrix& a) {
  return sag_pool(layer, x, Topology(Adjacency(a)));
}

Tensor global_mean_readout(const Tensor& x, std::span<const std::size_t> node_to_graph,
                           std::size_t num_graphs) {
  std::vector<bool> seen(num_graphs, false);
  for (std::size_t g : node_to_graph)
    if (g < num_graphs) seen[g] = true;
  for (std::size_t b = 0; b < num_graphs; ++b)
    if (!seen[b]) log_warning("global_mean_readout: graph " + std::to_string(b) + " has no nodes");
  return segment_mean(x, node_to_graph, num_graphs);
}

}  // namespace gnnpool
