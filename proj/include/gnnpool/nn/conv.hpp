#pragma once

#include <cstddef>
#include <random>
#include <string_view>
#include <vector>

#include "gnnpool/autodiff/tensor.hpp"
#include "gnnpool/graph/adjacency.hpp"
#include "gnnpool/graph/sparse_matrix.hpp"

namespace gnnpool {

enum class Activation { identity, relu };
enum class ConvKind { gcn, sage, tagcn };

std::string_view conv_name(ConvKind kind);
ConvKind parse_conv(std::string_view name);

// Uniform in +-sqrt(6 / (rows + cols)), trainable.
Tensor glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

Tensor activate(const Tensor& x, Activation activation);

// sigma(A_hat x W + b) with A_hat = D^-1/2 (A + I) D^-1/2.
struct GcnLayer {
  Tensor weight;  // [c x c']
  Tensor bias;    // [c'] or undefined
  Activation activation = Activation::relu;

  static GcnLayer create(std::size_t in, std::size_t out, std::mt19937_64& rng,
                         Activation activation = Activation::relu);
  std::size_t in_channels() const { return weight.rows(); }
  std::size_t out_channels() const { return weight.cols(); }
  std::vector<Tensor> parameters() const;
};

// sigma([x_v | mean of x_u over neighbors u] W + b), full neighborhood.
struct SageLayer {
  Tensor weight;  // [2c x c']
  Tensor bias;
  Activation activation = Activation::relu;

  static SageLayer create(std::size_t in, std::size_t out, std::mt19937_64& rng,
                          Activation activation = Activation::relu);
  std::size_t in_channels() const { return weight.rows() / 2; }
  std::size_t out_channels() const { return weight.cols(); }
  std::vector<Tensor> parameters() const;
};

// sigma(sum_{i=0..K} A_tilde^i x W_i + b) with A_tilde = D^-1/2 A D^-1/2.
struct TagcnLayer {
  std::vector<Tensor> weights;  // K + 1 matrices, each [c x c']
  Tensor bias;
  Activation activation = Activation::relu;

  static TagcnLayer create(std::size_t in, std::size_t out, std::size_t order,
                           std::mt19937_64& rng, Activation activation = Activation::relu);
  std::size_t order() const { return weights.size() - 1; }
  std::size_t in_channels() const { return weights.front().rows(); }
  std::size_t out_channels() const { return weights.front().cols(); }
  std::vector<Tensor> parameters() const;
};

Tensor gcn_forward(const GcnLayer& layer, const Adjacency& a_norm, const Tensor& x);
Tensor gcn_forward(const GcnLayer& layer, const SparseMatrix& a_norm, const Tensor& x);

// mean_adj is the row-normalized adjacency D^-1 A.
Tensor sage_forward(const SageLayer& layer, const Adjacency& mean_adj, const Tensor& x);
// a is the raw adjacency.
Tensor sage_forward(const SageLayer& layer, const SparseMatrix& a, const Tensor& x);

// Powers are applied by repeated propagation; A_tilde^i is never formed.
Tensor tagcn_forward(const TagcnLayer& layer, const Adjacency& a_norm, const Tensor& x);
Tensor tagcn_forward(const TagcnLayer& layer, const SparseMatrix& a_norm, const Tensor& x);

// Any of the three layers behind one interface.
class ConvLayer {
 public:
  ConvLayer(ConvKind kind, std::size_t in, std::size_t out, std::size_t order,
            std::mt19937_64& rng, Activation activation = Activation::relu);

  ConvKind kind() const { return kind_; }
  Tensor forward(const Topology& topology, const Tensor& x) const;
  std::vector<Tensor> parameters() const;
  std::size_t out_channels() const;

  const GcnLayer& gcn() const { return gcn_; }
  const SageLayer& sage() const { return sage_; }
  const TagcnLayer& tagcn() const { return tagcn_; }

 private:
  ConvKind kind_;
  GcnLayer gcn_;
  SageLayer sage_;
  TagcnLayer tagcn_;
};

}  // namespace gnnpool
