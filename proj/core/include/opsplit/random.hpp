#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "opsplit/model.hpp"

namespace opsplit {

using Rng = std::mt19937_64;

/// Entries drawn from N(0, scale^2).
Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0);
std::vector<double> random_vector(std::size_t n, Rng& rng, double scale = 1.0);

/// Shape and initialization of a randomly drawn model.
struct ModelShape {
  Mode mode = Mode::vanilla;
  std::size_t n_x = 4;
  std::size_t n_y = 4;
  std::size_t depth = 2;   // J
  std::size_t blocks = 1;  // N_t
  std::size_t heads = 2;   // multihead mode only
  PatchGrid grid{2, 2};    // cvt mode only, grid.size() must equal n_y
  std::size_t kernel = 3;  // cvt kernel extent (odd)
  /// Standard deviation of attention and FFN weights; 0 picks 1/sqrt(n_y).
  double weight_scale = 0.0;
  double bias_scale = 0.1;
  /// Draw one bias value per layer and repeat it on every row, which keeps
  /// the block equivariant under token permutations.
  bool uniform_bias = false;
  StepOptions options;
};

ModelParams random_model(const ModelShape& shape, Rng& rng);

/// Embedding D x n_y, class token, head n_y x d.
VitParams random_vit(std::size_t patch_dim, std::size_t n_y, std::size_t out_dim, Rng& rng,
                     double scale = 0.0);

}  // namespace opsplit
