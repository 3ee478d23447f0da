#include "gnnpool/graph/graph.hpp"

#include <algorithm>
#include <string>

#include "gnnpool/errors.hpp"

namespace gnnpool {

Graph::Graph(SparseMatrix adjacency, Tensor features, std::size_t label, std::size_t id)
    : adjacency_(std::move(adjacency)), features_(std::move(features)), label_(label), id_(id) {
  if (adjacency_.rows() != adjacency_.cols())
    throw ValidationError("graph " + std::to_string(id_) + ": adjacency is not square");
  if (!adjacency_.is_symmetric())
    throw ValidationError("graph " + std::to_string(id_) + ": adjacency is not symmetric");
  if (!adjacency_.is_binary())
    throw ValidationError("graph " + std::to_string(id_) + ": adjacency is not binary");
  if (!features_.defined() || features_.rank() != 2 || features_.rows() != adjacency_.rows()) {
    throw ValidationError("graph " + std::to_string(id_) + ": features " +
                          shape_string(features_.shape()) + " for " +
                          std::to_string(adjacency_.rows()) + " nodes");
  }
  gcn_norm_ = normalize_gcn(adjacency_);
  tagcn_norm_ = normalize_tagcn(adjacency_);
  mean_norm_ = normalize_mean(adjacency_);
}

std::size_t Graph::num_undirected_edges() const {
  std::size_t loops = 0;
  for (std::size_t r = 0; r < adjacency_.rows(); ++r)
    if (adjacency_.at(r, r) != 0.0) ++loops;
  return (adjacency_.nnz() - loops) / 2 + loops;
}

std::size_t GraphBatch::max_graph_size() const {
  std::size_t best = 0;
  for (std::size_t b = 0; b + 1 < offsets.size(); ++b)
    best = std::max(best, offsets[b + 1] - offsets[b]);
  return best;
}

Graph GraphBatch::slice(std::size_t b) const {
  if (b >= num_graphs()) throw IndexError("GraphBatch::slice: graph index out of range");
  const std::size_t lo = offsets[b], hi = offsets[b + 1], n = hi - lo;
  std::vector<Triplet> t;
  for (std::size_t r = lo; r < hi; ++r)
    for (std::size_t e = adjacency.row_ptr()[r]; e < adjacency.row_ptr()[r + 1]; ++e)
      t.push_back({r - lo, adjacency.col_index()[e] - lo, adjacency.values()[e]});
  const std::size_t c = features.cols();
  std::vector<double> x(features.values().begin() + static_cast<std::ptrdiff_t>(lo * c),
                        features.values().begin() + static_cast<std::ptrdiff_t>(hi * c));
  return Graph(SparseMatrix(n, n, std::move(t)), Tensor::matrix(n, c, std::move(x)), labels[b],
               ids[b]);
}

GraphBatch batch_graphs(std::span<const Graph* const> graphs) {
  if (graphs.empty()) throw ValidationError("batch_graphs: empty graph list");
  const std::size_t c = graphs.front()->feature_width();
  GraphBatch batch;
  std::vector<const SparseMatrix*> adj, gcn, tag, mean;
  std::size_t total = 0;
  for (const Graph* g : graphs) {
    if (g->feature_width() != c) {
      throw ValidationError("batch_graphs: feature width " + std::to_string(g->feature_width()) +
                            " differs from " + std::to_string(c));
    }
    total += g->num_nodes();
  }
  std::vector<double> x;
  x.reserve(total * c);
  batch.offsets.push_back(0);
  for (std::size_t b = 0; b < graphs.size(); ++b) {
    const Graph* g = graphs[b];
    adj.push_back(&g->adjacency());
    gcn.push_back(&g->gcn_normalized());
    tag.push_back(&g->tagcn_normalized());
    mean.push_back(&g->mean_normalized());
    x.insert(x.end(), g->features().values().begin(), g->features().values().end());
    batch.node_to_graph.insert(batch.node_to_graph.end(), g->num_nodes(), b);
    batch.offsets.push_back(batch.offsets.back() + g->num_nodes());
    batch.labels.push_back(g->label());
    batch.ids.push_back(g->id());
  }
  batch.adjacency = block_diagonal(adj);
  batch.gcn_norm = block_diagonal(gcn);
  batch.tagcn_norm = block_diagonal(tag);
  batch.mean_norm = block_diagonal(mean);
  batch.features = Tensor::matrix(total, c, std::move(x));
  return batch;
}

GraphBatch batch_graphs(std::span<const Graph> graphs) {
  std::vector<const Graph*> ptrs;
  ptrs.reserve(graphs.size());
  for (const Graph& g : graphs) ptrs.push_back(&g);
  return batch_graphs(std::span<const Graph* const>(ptrs));
}

}  // namespace gnnpool
