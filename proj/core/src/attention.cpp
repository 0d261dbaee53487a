#include "opsplit/attention.hpp"

#include <cmath>
#include <string>

namespace opsplit {

namespace {

void require_odd_kernel(const Kernel& k, const char* name) {
  if (k.empty() || k.rows() % 2 == 0 || k.cols() % 2 == 0) {
    throw ConfigError(std::string(name) + ": convolution kernel must have odd extents, got " +
                      std::to_string(k.rows()) + "x" + std::to_string(k.cols()));
  }
}

// scores(Q, K) V without the residual.
GridFunction attention_term(const QKV& t, std::size_t dim) { return matmul(scores(t.q, t.k, dim), t.v); }

}  // namespace

std::size_t scale_dim(ScoreScale scale, std::size_t n_x, std::size_t n_y) {
  switch (scale) {
    case ScoreScale::embedding:
      return n_y;
    case ScoreScale::unscaled:
      return 1;
    case ScoreScale::tokens:
      return n_x;
  }
  return n_y;
}

std::size_t SingleHeadWeights::dim() const {
  const std::size_t n = w_q.rows();
  if (n == 0 || w_q.cols() != n || w_k.rows() != n || w_k.cols() != n || w_v.rows() != n ||
      w_v.cols() != n) {
    throw DimensionError("attention weights must be square with one shared dimension");
  }
  return n;
}

std::size_t MultiHeadWeights::dim() const {
  if (heads.empty()) throw ConfigError("multi-head attention needs at least one head");
  const std::size_t n = heads.front().dim();
  for (const auto& h : heads) {
    if (h.dim() != n) throw DimensionError("attention heads disagree on embedding dimension");
  }
  return n;
}

void ConvHeadWeights::validate(std::size_t n_y) const {
  if (grid.size() != n_y) {
    throw DimensionError("patch grid " + std::to_string(grid.height) + "x" +
                         std::to_string(grid.width) + " does not factor n_y = " +
                         std::to_string(n_y));
  }
  require_odd_kernel(w_q, "w_q");
  require_odd_kernel(w_k, "w_k");
  require_odd_kernel(w_v, "w_v");
}

QKV qkv(const GridFunction& u, const SingleHeadWeights& w) {
  const std::size_t n = w.dim();
  if (u.cols() != n) {
    throw DimensionError("qkv: state has n_y = " + std::to_string(u.cols()) +
                         " but weights are " + std::to_string(n) + "x" + std::to_string(n));
  }
  return {matmul(u, w.w_q), matmul(u, w.w_k), matmul(u, w.w_v)};
}

Matrix scores(const GridFunction& q, const GridFunction& k, std::size_t dim) {
  if (q.rows() != k.rows() || q.cols() != k.cols()) {
    throw DimensionError("scores: Q and K shapes differ");
  }
  if (dim == 0) throw ConfigError("scores: scale dimension must be positive");
  Matrix s = matmul_transposed(q, k);
  const double inv = 1.0 / std::sqrt(static_cast<double>(dim));
  for (double& v : s.values()) v *= inv;
  return softmax2(s);
}

GridFunction attention_substep(const GridFunction& u0, const SingleHeadWeights& w,
                               std::size_t dim) {
  return u0 + attention_term(qkv(u0, w), dim);
}

GridFunction multihead_substep(const GridFunction& u0, const MultiHeadWeights& w,
                               std::size_t dim) {
  w.dim();
  // Head contributions are summed first, in head order, then added to u0.
  GridFunction sum = attention_term(qkv(u0, w.heads.front()), dim);
  for (std::size_t m = 1; m < w.heads.size(); ++m) {
    sum = sum + attention_term(qkv(u0, w.heads[m]), dim);
  }
  return u0 + sum;
}

Matrix convolve2d_same(const Matrix& image, const Kernel& kernel) {
  require_odd_kernel(kernel, "convolve2d_same");
  const auto h = static_cast<long>(image.rows());
  const auto w = static_cast<long>(image.cols());
  const auto ca = static_cast<long>(kernel.rows() / 2);
  const auto cb = static_cast<long>(kernel.cols() / 2);
  Matrix out(image.rows(), image.cols());
  for (long i = 0; i < h; ++i) {
    for (long j = 0; j < w; ++j) {
      double s = 0.0;
      for (long a = 0; a < static_cast<long>(kernel.rows()); ++a) {
        const long si = i - (a - ca);
        if (si < 0 || si >= h) continue;
        for (long b = 0; b < static_cast<long>(kernel.cols()); ++b) {
          const long sj = j - (b - cb);
          if (sj < 0 || sj >= w) continue;
          s += kernel(a, b) * image(si, sj);
        }
      }
      out(i, j) = s;
    }
  }
  return out;
}

GridFunction convolve_tokens(const GridFunction& u, const Kernel& kernel, const PatchGrid& grid) {
  if (grid.size() != u.cols()) {
    throw DimensionError("convolve_tokens: patch grid " + std::to_string(grid.height) + "x" +
                         std::to_string(grid.width) + " does not match n_y = " +
                         std::to_string(u.cols()));
  }
  GridFunction out(u.rows(), u.cols());
  for (std::size_t x = 0; x < u.rows(); ++x) {
    const auto row = u.row(x);
    Matrix image(grid.height, grid.width, {row.begin(), row.end()});
    const Matrix conv = convolve2d_same(image, kernel);
    const auto src = conv.values();
    auto dst = out.row(x);
    for (std::size_t l = 0; l < dst.size(); ++l) dst[l] = src[l];
  }
  return out;
}

QKV conv_qkv(const GridFunction& u, const ConvHeadWeights& w) {
  w.validate(u.cols());
  return {convolve_tokens(u, w.w_q, w.grid), convolve_tokens(u, w.w_k, w.grid),
          convolve_tokens(u, w.w_v, w.grid)};
}

GridFunction conv_attention_substep(const GridFunction& u0, const ConvHeadWeights& w,
                                    std::size_t dim) {
  return u0 + attention_term(conv_qkv(u0, w), dim);
}

}  // namespace opsplit
