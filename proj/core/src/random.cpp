#include "opsplit/random.hpp"

#include <cmath>

namespace opsplit {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = scale * normal(rng);
  return m;
}

std::vector<double> random_vector(std::size_t n, Rng& rng, double scale) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = scale * normal(rng);
  return v;
}

namespace {

std::vector<double> draw_bias(const ModelShape& s, Rng& rng) {
  if (!s.uniform_bias) return random_vector(s.n_x, rng, s.bias_scale);
  const double b = random_vector(1, rng, s.bias_scale).front();
  return std::vector<double>(s.n_x, b);
}

}  // namespace

ModelParams random_model(const ModelShape& s, Rng& rng) {
  ModelParams m;
  m.mode = s.mode;
  m.n_x = s.n_x;
  m.n_y = s.n_y;
  m.options = s.options;
  const double ws = s.weight_scale > 0.0 ? s.weight_scale : 1.0 / std::sqrt(static_cast<double>(s.n_y));

  auto head = [&] {
    return SingleHeadWeights{random_matrix(s.n_y, s.n_y, rng, ws), random_matrix(s.n_y, s.n_y, rng, ws),
                             random_matrix(s.n_y, s.n_y, rng, ws)};
  };

  for (std::size_t n = 0; n < s.blocks; ++n) {
    BlockParams b;
    switch (s.mode) {
      case Mode::vanilla:
        b.attn = head();
        break;
      case Mode::multihead: {
        MultiHeadWeights mh;
        for (std::size_t h = 0; h < s.heads; ++h) mh.heads.push_back(head());
        b.attn = std::move(mh);
        break;
      }
      case Mode::cvt: {
        const double ks = 1.0 / static_cast<double>(s.kernel);
        b.conv_embed = ConvTokenEmbedParams{s.grid, random_matrix(s.kernel, s.kernel, rng, ks),
                                            draw_bias(s, rng)};
        b.attn = ConvHeadWeights{s.grid, random_matrix(s.kernel, s.kernel, rng, ks),
                                 random_matrix(s.kernel, s.kernel, rng, ks),
                                 random_matrix(s.kernel, s.kernel, rng, ks)};
        break;
      }
    }
    for (std::size_t j = 0; j < s.depth; ++j) {
      b.ffn.push_back({random_matrix(s.n_y, s.n_y, rng, ws), draw_bias(s, rng)});
    }
    m.blocks.push_back(std::move(b));
  }
  m.validate();
  return m;
}

VitParams random_vit(std::size_t patch_dim, std::size_t n_y, std::size_t out_dim, Rng& rng,
                     double scale) {
  const double es = scale > 0.0 ? scale : 1.0 / std::sqrt(static_cast<double>(patch_dim));
  const double hs = scale > 0.0 ? scale : 1.0 / std::sqrt(static_cast<double>(n_y));
  return {random_matrix(patch_dim, n_y, rng, es), random_vector(n_y, rng, 1.0),
          random_matrix(n_y, out_dim, rng, hs)};
}

}  // namespace opsplit
