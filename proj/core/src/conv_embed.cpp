#include "opsplit/conv_embed.hpp"

#include <string>

namespace opsplit {

void ConvTokenEmbedParams::validate(std::size_t n_x, std::size_t n_y) const {
  if (grid.size() != n_y) {
    throw DimensionError("conv token embedding: patch grid " + std::to_string(grid.height) + "x" +
                         std::to_string(grid.width) + " does not match n_y = " +
                         std::to_string(n_y));
  }
  if (kernel.empty() || kernel.rows() % 2 == 0 || kernel.cols() % 2 == 0) {
    throw ConfigError("conv token embedding: kernel extents must be odd");
  }
  if (bias.size() != n_x) {
    throw DimensionError("conv token embedding: bias length " + std::to_string(bias.size()) +
                         " does not match n_x = " + std::to_string(n_x));
  }
}

GridFunction conv_token_embed_substep(const GridFunction& u0, const ConvTokenEmbedParams& p) {
  p.validate(u0.rows(), u0.cols());
  GridFunction out = convolve_tokens(u0, p.kernel, p.grid);
  for (std::size_t k = 0; k < out.rows(); ++k) {
    const auto src = u0.row(k);
    auto dst = out.row(k);
    for (std::size_t l = 0; l < dst.size(); ++l) dst[l] = src[l] + dst[l] + p.bias[k];
  }
  return out;
}

}  // namespace opsplit
