#pragma once

#include <cstddef>
#include <vector>

#include "opsplit/grid.hpp"
#include "opsplit/model.hpp"

namespace opsplit::reference {

// A deliberately naive textbook encoder block written with explicit loops.
// It shares storage types with the rest of the library but none of the
// arithmetic, so it can serve as an independent oracle for block_step.

struct LayerNormParams {
  double mean = 0.0;
  double std = 1.0;
  double epsilon = 1e-12;
};

struct LinearLayer {
  Matrix weight;             // n_y x n_y, used as u * weight
  std::vector<double> bias;  // one entry per token row
};

struct StdBlockParams {
  Matrix w_q;
  Matrix w_k;
  Matrix w_v;
  LayerNormParams ln1;
  LayerNormParams ln2;
  std::vector<LinearLayer> ffn;
};

/// softmax(Q K^T / sqrt(scale_dim)) V, no residual.
Matrix std_attention(const Matrix& u, const Matrix& w_q, const Matrix& w_k, const Matrix& w_v,
                     std::size_t scale_dim);

/// Per-token layer norm to the given mean and standard deviation; rows whose
/// variance is below epsilon become constant `mean`.
Matrix std_layer_norm(const Matrix& u, const LayerNormParams& p);

/// Linear layers, each followed by ReLU.
Matrix std_ffn(const Matrix& u, const std::vector<LinearLayer>& layers);

/// ln2(skip(ffn(h), h)) with h = ln1(u + attention(u)).
Matrix std_encoder_block(const Matrix& u, const StdBlockParams& p, SkipMode skip,
                         std::size_t scale_dim);

/// Translates splitting-scheme parameters of a single-head block into the
/// standard parameterization: weight I + W_j, same biases and norm targets.
StdBlockParams map_to_standard(const BlockParams& p);

/// Chains std_encoder_block over every block of a vanilla model.
Matrix std_encoder_stack(const Matrix& u, const ModelParams& m);

}  // namespace opsplit::reference
