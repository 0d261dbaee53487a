#pragma once

#include <vector>

#include "opsplit/attention.hpp"
#include "opsplit/grid.hpp"

namespace opsplit {

/// Convolutional token embedding: one 2-D kernel shared by all tokens plus a
/// per-token bias.
struct ConvTokenEmbedParams {
  PatchGrid grid;
  Kernel kernel;          // odd x odd
  std::vector<double> bias;  // length n_x

  void validate(std::size_t n_x, std::size_t n_y) const;
};

/// u0 + conv(u0 row on the patch grid) + bias[k] on row k.
GridFunction conv_token_embed_substep(const GridFunction& u0, const ConvTokenEmbedParams& p);

}  // namespace opsplit
