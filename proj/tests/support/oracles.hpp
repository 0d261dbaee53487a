#pragma once

// Independent oracles for the unit and acceptance tests. Everything here is
// written with plain loops over std::vector and calls nothing from the
// library except for the Matrix container itself, unless stated otherwise.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "opsplit/grid.hpp"
#include "opsplit/model.hpp"
#include "opsplit/projection.hpp"
#include "opsplit/splitting.hpp"

namespace opsplit::oracle {

using Vec = std::vector<double>;
using Table = std::vector<Vec>;

inline Table to_table(const Matrix& m) {
  Table t(m.rows(), Vec(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t[i][j] = m(i, j);
  return t;
}

inline Matrix from_table(const Table& t) {
  Matrix m(t.size(), t.front().size());
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t[i].size(); ++j) m(i, j) = t[i][j];
  return m;
}

inline double max_abs(const Matrix& a, const Table& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) e = std::max(e, std::abs(a(i, j) - b[i][j]));
  return e;
}

/// Cross-correlates a flipped kernel against the image the slow way:
/// out(i, j) = sum over image pixels (p, q) of img(p, q) K(i - p + c, j - q + c).
inline Vec naive_conv_row(const Vec& row, std::size_t h, std::size_t w, const Table& k) {
  const long kr = static_cast<long>(k.size());
  const long kc = static_cast<long>(k.front().size());
  Vec out(h * w, 0.0);
  for (long i = 0; i < static_cast<long>(h); ++i) {
    for (long j = 0; j < static_cast<long>(w); ++j) {
      double s = 0.0;
      for (long p = 0; p < static_cast<long>(h); ++p) {
        for (long q = 0; q < static_cast<long>(w); ++q) {
          const long a = i - p + kr / 2;
          const long b = j - q + kc / 2;
          if (a < 0 || b < 0 || a >= kr || b >= kc) continue;
          s += row[p * w + q] * k[a][b];
        }
      }
      out[i * w + j] = s;
    }
  }
  return out;
}

/// u0 + softmax(Q K^T / sqrt(dim)) V with Q, K, V the row-wise convolutions
/// of u0 by the three kernels.
inline Table naive_conv_attention(const Table& u0, std::size_t h, std::size_t w, const Table& kq,
                                  const Table& kk, const Table& kv, std::size_t dim) {
  const std::size_t n = u0.size();
  const std::size_t m = u0.front().size();
  Table q(n), k(n), v(n);
  for (std::size_t t = 0; t < n; ++t) {
    q[t] = naive_conv_row(u0[t], h, w, kq);
    k[t] = naive_conv_row(u0[t], h, w, kk);
    v[t] = naive_conv_row(u0[t], h, w, kv);
  }
  Table out = u0;
  for (std::size_t i = 0; i < n; ++i) {
    Vec s(n);
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t l = 0; l < m; ++l) dot += q[i][l] * k[j][l];
      s[j] = dot / std::sqrt(static_cast<double>(dim));
    }
    const double top = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double& x : s) z += (x = std::exp(x - top));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = 0; l < m; ++l) out[i][l] += s[j] / z * v[j][l];
  }
  return out;
}

/// exp(-T S) u0 for S = [[0,1],[1,0]] and u0 = (1, 0): S^2 = I, so
/// exp(-T S) = cosh(T) I - sinh(T) S.
inline Vec noncommuting_exact(double t) { return {std::cosh(t), -std::sinh(t)}; }

/// Re-runs one block through standalone library calls, returning every
/// intermediate state in schedule order (input first).
inline std::vector<Matrix> replay_block(const Matrix& u0, const BlockParams& p, Mode mode,
                                        const StepOptions& opts) {
  std::vector<Matrix> states{u0};
  Matrix u = u0;
  if (mode == Mode::cvt) {
    u = conv_token_embed_substep(u, *p.conv_embed);
    states.push_back(u);
    u = project_s1(u, p.norm1);
    states.push_back(u);
  }
  u = apply_attention(u, p, opts);
  states.push_back(u);
  const Matrix anchor = project_s1(u, p.norm1);
  states.push_back(anchor);
  u = anchor;
  for (const auto& layer : p.ffn) {
    u = ffn_substep(u, layer);
    states.push_back(u);
  }
  u = opts.skip == SkipMode::average ? 0.5 * (u + anchor) : u + anchor;
  states.push_back(u);
  states.push_back(project_s1(u, p.norm2));
  return states;
}

}  // namespace opsplit::oracle
