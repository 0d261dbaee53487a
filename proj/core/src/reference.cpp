#include "opsplit/reference.hpp"

#include <cmath>

namespace opsplit::reference {

Matrix std_attention(const Matrix& u, const Matrix& w_q, const Matrix& w_k, const Matrix& w_v,
                     std::size_t scale_dim) {
  const std::size_t n = u.rows();
  const std::size_t d = u.cols();
  if (w_q.rows() != d || w_k.rows() != d || w_v.rows() != d) {
    throw DimensionError("std_attention: weight rows must equal the embedding width");
  }
  const std::size_t dk = w_q.cols();
  const std::size_t dv = w_v.cols();
  if (w_k.cols() != dk) throw DimensionError("std_attention: query/key widths differ");

  std::vector<std::vector<double>> q(n, std::vector<double>(dk, 0.0));
  std::vector<std::vector<double>> k(n, std::vector<double>(dk, 0.0));
  std::vector<std::vector<double>> v(n, std::vector<double>(dv, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dk; ++j) {
      double sq = 0.0, sk = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        sq += u(i, c) * w_q(c, j);
        sk += u(i, c) * w_k(c, j);
      }
      q[i][j] = sq;
      k[i][j] = sk;
    }
    for (std::size_t j = 0; j < dv; ++j) {
      double sv = 0.0;
      for (std::size_t c = 0; c < d; ++c) sv += u(i, c) * w_v(c, j);
      v[i][j] = sv;
    }
  }

  const double norm = std::sqrt(static_cast<double>(scale_dim));
  Matrix out(n, dv);
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    double peak = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t c = 0; c < dk; ++c) dot += q[i][c] * k[j][c];
      weights[j] = dot * (1.0 / norm);
      if (weights[j] > peak) peak = weights[j];
    }
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      weights[j] = std::exp(weights[j] - peak);
      total += weights[j];
    }
    for (std::size_t j = 0; j < n; ++j) weights[j] /= total;
    for (std::size_t c = 0; c < dv; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += weights[j] * v[j][c];
      out(i, c) = acc;
    }
  }
  return out;
}

Matrix std_layer_norm(const Matrix& u, const LayerNormParams& p) {
  Matrix out(u.rows(), u.cols());
  const double width = static_cast<double>(u.cols());
  for (std::size_t i = 0; i < u.rows(); ++i) {
    double mu = 0.0;
    for (std::size_t c = 0; c < u.cols(); ++c) mu += u(i, c);
    mu = mu / width;
    double var = 0.0;
    for (std::size_t c = 0; c < u.cols(); ++c) var += (u(i, c) - mu) * (u(i, c) - mu);
    var = var / width;
    for (std::size_t c = 0; c < u.cols(); ++c) {
      out(i, c) = var < p.epsilon ? p.mean : p.std * (u(i, c) - mu) / std::sqrt(var) + p.mean;
    }
  }
  return out;
}

Matrix std_ffn(const Matrix& u, const std::vector<LinearLayer>& layers) {
  Matrix h = u;
  for (const auto& layer : layers) {
    if (layer.weight.rows() != h.cols() || layer.bias.size() != h.rows()) {
      throw DimensionError("std_ffn: layer shape mismatch");
    }
    Matrix next(h.rows(), layer.weight.cols());
    for (std::size_t i = 0; i < h.rows(); ++i) {
      for (std::size_t j = 0; j < layer.weight.cols(); ++j) {
        double z = 0.0;
        for (std::size_t c = 0; c < h.cols(); ++c) z += h(i, c) * layer.weight(c, j);
        z += layer.bias[i];
        next(i, j) = z > 0.0 ? z : 0.0;
      }
    }
    h = std::move(next);
  }
  return h;
}

Matrix std_encoder_block(const Matrix& u, const StdBlockParams& p, SkipMode skip,
                         std::size_t scale_dim) {
  const Matrix attn = std_attention(u, p.w_q, p.w_k, p.w_v, scale_dim);
  Matrix res1(u.rows(), u.cols());
  for (std::size_t i = 0; i < u.rows(); ++i) {
    for (std::size_t c = 0; c < u.cols(); ++c) res1(i, c) = u(i, c) + attn(i, c);
  }
  const Matrix h = std_layer_norm(res1, p.ln1);
  const Matrix f = std_ffn(h, p.ffn);
  Matrix res2(h.rows(), h.cols());
  for (std::size_t i = 0; i < h.rows(); ++i) {
    for (std::size_t c = 0; c < h.cols(); ++c) {
      res2(i, c) = skip == SkipMode::average ? 0.5 * (f(i, c) + h(i, c)) : f(i, c) + h(i, c);
    }
  }
  return std_layer_norm(res2, p.ln2);
}

StdBlockParams map_to_standard(const BlockParams& p) {
  const auto* w = std::get_if<SingleHeadWeights>(&p.attn);
  if (w == nullptr) throw ConfigError("map_to_standard: only single-head blocks have a mapping");
  StdBlockParams s;
  s.w_q = w->w_q;
  s.w_k = w->w_k;
  s.w_v = w->w_v;
  s.ln1 = {p.norm1.sigma1, p.norm1.sigma2, p.norm1.epsilon};
  s.ln2 = {p.norm2.sigma1, p.norm2.sigma2, p.norm2.epsilon};
  for (const auto& layer : p.ffn) {
    Matrix weight = layer.w;
    for (std::size_t i = 0; i < weight.rows(); ++i) weight(i, i) += 1.0;
    s.ffn.push_back({std::move(weight), layer.b});
  }
  return s;
}

Matrix std_encoder_stack(const Matrix& u, const ModelParams& m) {
  Matrix h = u;
  std::size_t dim = m.n_y;
  if (m.options.scale == ScoreScale::unscaled) dim = 1;
  if (m.options.scale == ScoreScale::tokens) dim = m.n_x;
  for (const auto& b : m.blocks) h = std_encoder_block(h, map_to_standard(b), m.options.skip, dim);
  return h;
}

}  // namespace opsplit::reference
