#pragma once

#include <span>
#include <vector>

#include "opsplit/grid.hpp"

namespace opsplit {

/// One feedforward substep: a square weight acting on the embedding axis and
/// one bias per token row.
struct FfnLayerParams {
  Kernel w;               // n_y x n_y, applied as u (I + w)
  std::vector<double> b;  // length n_x, b[k] added to every entry of row k

  void validate(std::size_t n_x, std::size_t n_y) const;
};

/// Linear half of the substep: u + u w + b (bias broadcast along rows).
GridFunction ffn_linear(const GridFunction& u, const FfnLayerParams& p);

/// project_s2(ffn_linear(u, p)).
GridFunction ffn_substep(const GridFunction& u, const FfnLayerParams& p);

/// Applies the layers in order. Throws ConfigError on an empty list.
GridFunction ffn_stack(const GridFunction& u, std::span<const FfnLayerParams> layers);

}  // namespace opsplit
