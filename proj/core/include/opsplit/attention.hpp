#pragma once

#include <cstddef>
#include <vector>

#include "opsplit/grid.hpp"

namespace opsplit {

/// Divisor applied inside the softmax, as sqrt(dim).
///
/// `embedding` uses n_y and is the default everywhere. `unscaled` reproduces
/// the bare discrete formula without any divisor, `tokens` divides by sqrt(n_x).
enum class ScoreScale { embedding, unscaled, tokens };

/// Resolves a ScoreScale to the integer whose square root divides the
/// scores for an n_x x n_y state.
std::size_t scale_dim(ScoreScale scale, std::size_t n_x, std::size_t n_y);

struct SingleHeadWeights {
  Kernel w_q;
  Kernel w_k;
  Kernel w_v;

  /// Shared embedding dimension; throws unless all three are square and equal.
  std::size_t dim() const;
};

struct MultiHeadWeights {
  std::vector<SingleHeadWeights> heads;

  std::size_t dim() const;
};

/// Patch layout that reinterprets one token row of length n_y = height*width
/// as a 2-D image.
struct PatchGrid {
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t size() const noexcept { return height * width; }
  friend bool operator==(const PatchGrid&, const PatchGrid&) = default;
};

struct ConvHeadWeights {
  PatchGrid grid;
  Kernel w_q;  // odd x odd convolution kernels
  Kernel w_k;
  Kernel w_v;

  void validate(std::size_t n_y) const;
};

struct QKV {
  GridFunction q;
  GridFunction k;
  GridFunction v;
};

QKV qkv(const GridFunction& u, const SingleHeadWeights& w);

/// softmax2(Q K^T / sqrt(dim)).
Matrix scores(const GridFunction& q, const GridFunction& k, std::size_t dim);

/// u0 + scores(Q, K) V with Q = u0 W^Q etc. The residual is part of the substep.
GridFunction attention_substep(const GridFunction& u0, const SingleHeadWeights& w,
                               std::size_t dim);

/// u0 + sum over heads of the per-head attention term. u0 is added once.
GridFunction multihead_substep(const GridFunction& u0, const MultiHeadWeights& w, std::size_t dim);

/// Same-size 2-D convolution of `image` (height x width) with an odd kernel,
/// zero padding outside the image. out(i,j) = sum_{a,b} K(a,b) img(i-a+ca, j-b+cb)
/// where (ca, cb) is the kernel centre.
Matrix convolve2d_same(const Matrix& image, const Kernel& kernel);

/// Applies convolve2d_same to every token row reshaped on `grid`.
GridFunction convolve_tokens(const GridFunction& u, const Kernel& kernel, const PatchGrid& grid);

QKV conv_qkv(const GridFunction& u, const ConvHeadWeights& w);

GridFunction conv_attention_substep(const GridFunction& u0, const ConvHeadWeights& w,
                                    std::size_t dim);

}  // namespace opsplit
