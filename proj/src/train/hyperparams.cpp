#include "gnnpool/train/hyperparams.hpp"

#include <sstream>

#include "gnnpool/errors.hpp"

namespace gnnpool {

void HyperParams::validate() const {
  const std::size_t max_layers = conv == ConvKind::tagcn ? kMaxTagcnLayers : kMaxGcnLayers;
  if (num_conv_layers < 1 || num_conv_layers > max_layers) {
    throw ArgumentError("num_conv_layers=" + std::to_string(num_conv_layers) + " outside 1.." +
                        std::to_string(max_layers) + " for " + std::string(conv_name(conv)));
  }
  if (hidden_channels < 1) throw ArgumentError("hidden_channels must be at least 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ArgumentError("dropout must lie in [0, 1)");
  if (batch_size < 1) throw ArgumentError("batch_size must be at least 1");
  if (pool != PoolKind::none && pool_k == 0 && !(pool_ratio > 0.0 && pool_ratio <= 1.0))
    throw ArgumentError("pool_ratio must lie in (0, 1]");
  if (pool == PoolKind::sortpool && sortpool_kernels < 1)
    throw ArgumentError("sortpool_kernels must be at least 1");
}

PoolSize HyperParams::pool_size() const {
  return pool_k > 0 ? PoolSize::fixed(pool_k) : PoolSize::fraction(pool_ratio);
}

std::string HyperParams::to_string() const {
  std::ostringstream out;
  out << "conv=" << conv_name(conv) << ";pool=" << pool_name(pool)
      << ";layers=" << num_conv_layers << ";channels=" << hidden_channels
      << ";dropout=" << dropout;
  if (pool != PoolKind::none) {
    if (pool_k > 0) out << ";k=" << pool_k;
    else out << ";ratio=" << pool_ratio;
  }
  if (conv == ConvKind::tagcn) out << ";K=" << poly_order;
  if (pool == PoolKind::sortpool) out << ";kernels=" << sortpool_kernels;
  if (hierarchical) out << ";hierarchical=1";
  out << ";epochs=" << epochs << ";batch=" << batch_size;
  return out.str();
}

std::vector<HyperParams> make_grid(GridPreset preset, ConvKind conv, PoolKind pool,
                                   const HyperParams& base) {
  std::vector<std::size_t> layers;
  if (preset == GridPreset::small) {
    layers = {2, 3, 5};
    if (conv != ConvKind::tagcn) layers.push_back(10);
  } else {
    const std::size_t max_layers = conv == ConvKind::tagcn ? kMaxTagcnLayers : kMaxGcnLayers;
    for (std::size_t l = 1; l <= max_layers; ++l) layers.push_back(l);
  }
  const std::vector<std::size_t> channels =
      preset == GridPreset::small ? std::vector<std::size_t>{32, 64}
                                  : std::vector<std::size_t>{16, 32, 64, 128};
  const std::vector<double> dropouts =
      preset == GridPreset::small ? std::vector<double>{0.0, 0.5}
                                  : std::vector<double>{0.0, 0.25, 0.5};
  std::vector<double> ratios{base.pool_ratio};
  if (pool != PoolKind::none) {
    ratios = preset == GridPreset::small ? std::vector<double>{0.25, 0.5}
                                         : std::vector<double>{0.1, 0.25, 0.5, 0.75};
  }

  std::vector<HyperParams> grid;
  for (std::size_t l : layers)
    for (std::size_t c : channels)
      for (double d : dropouts)
        for (double r : ratios) {
          HyperParams hp = base;
          hp.conv = conv;
          hp.pool = pool;
          hp.num_conv_layers = l;
          hp.hidden_channels = c;
          hp.dropout = d;
          hp.pool_ratio = r;
          grid.push_back(hp);
        }
  return grid;
}

}  // namespace gnnpool
