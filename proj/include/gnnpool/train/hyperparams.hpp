#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gnnpool/nn/conv.hpp"
#include "gnnpool/nn/pool.hpp"

namespace gnnpool {

struct HyperParams {
  ConvKind conv = ConvKind::tagcn;
  PoolKind pool = PoolKind::none;
  std::size_t num_conv_layers = 2;
  std::size_t hidden_channels = 32;
  double dropout = 0.0;
  double pool_ratio = 0.25;     // fraction of nodes kept / clusters per max graph size
  std::size_t pool_k = 0;       // fixed node count; overrides pool_ratio when nonzero
  std::size_t poly_order = 3;   // TAGCN filter order K
  std::size_t epochs = 200;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t sortpool_kernels = 16;
  bool hierarchical = false;    // pool after every conv layer instead of once at the end

  // Throws ArgumentError naming the offending field.
  void validate() const;
  PoolSize pool_size() const;

  // Compact key=value;... form, free of commas.
  std::string to_string() const;

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

inline constexpr std::size_t kMaxTagcnLayers = 5;
inline constexpr std::size_t kMaxGcnLayers = 15;

enum class GridPreset { small, wide };

// Grid for one (conv, pool) cell. The small grid uses layers {2,3,5} (plus 10
// for gcn/sage), channels {32,64}, dropout {0,0.5} and pool ratio {0.25,0.5};
// the wide grid spans 1-5 TAGCN layers or 1-15 GCN/SAGE layers.
std::vector<HyperParams> make_grid(GridPreset preset, ConvKind conv, PoolKind pool,
                                   const HyperParams& base = {});

}  // namespace gnnpool
