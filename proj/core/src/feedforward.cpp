#include "opsplit/feedforward.hpp"

#include <string>

#include "opsplit/projection.hpp"

namespace opsplit {

void FfnLayerParams::validate(std::size_t n_x, std::size_t n_y) const {
  require_shape(w, n_y, n_y, "ffn weight");
  if (b.size() != n_x) {
    throw DimensionError("ffn bias: expected length " + std::to_string(n_x) + ", got " +
                         std::to_string(b.size()));
  }
}

GridFunction ffn_linear(const GridFunction& u, const FfnLayerParams& p) {
  p.validate(u.rows(), u.cols());
  GridFunction out = matmul(u, p.w);
  for (std::size_t k = 0; k < out.rows(); ++k) {
    const auto src = u.row(k);
    auto dst = out.row(k);
    for (std::size_t l = 0; l < dst.size(); ++l) dst[l] = src[l] + dst[l] + p.b[k];
  }
  return out;
}

GridFunction ffn_substep(const GridFunction& u, const FfnLayerParams& p) {
  return project_s2(ffn_linear(u, p));
}

GridFunction ffn_stack(const GridFunction& u, std::span<const FfnLayerParams> layers) {
  if (layers.empty()) throw ConfigError("ffn_stack: at least one layer is required");
  GridFunction cur = u;
  for (const auto& layer : layers) cur = ffn_substep(cur, layer);
  return cur;
}

}  // namespace opsplit
