#include "opsplit/projection.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace opsplit {

void NormTarget::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw ConfigError("norm target sigma2 must be positive, got " + std::to_string(sigma2));
  }
  if (!(epsilon > 0.0)) throw ConfigError("norm target epsilon must be positive");
  if (!std::isfinite(sigma1)) throw ConfigError("norm target sigma1 must be finite");
}

RowStats row_stats(std::span<const double> row) {
  const double n = static_cast<double>(row.size());
  double sum = 0.0;
  for (double v : row) sum += v;
  const double mean = sum / n;
  double sq = 0.0;
  for (double v : row) sq += (v - mean) * (v - mean);
  return {mean, sq / n};
}

S1Projection project_s1_detailed(const GridFunction& v, const NormTarget& t) {
  t.validate();
  S1Projection out{GridFunction(v.rows(), v.cols()), {}};
  for (std::size_t k = 0; k < v.rows(); ++k) {
    const auto src = v.row(k);
    auto dst = out.value.row(k);
    const RowStats s = row_stats(src);
    if (s.variance < t.epsilon) {
      out.degenerate_rows.push_back(k);
      for (double& x : dst) x = t.sigma1;
      continue;
    }
    const double root = std::sqrt(s.variance);
    for (std::size_t l = 0; l < src.size(); ++l) {
      dst[l] = t.sigma2 * (src[l] - s.mean) / root + t.sigma1;
    }
  }
  return out;
}

GridFunction project_s1(const GridFunction& v, const NormTarget& t) {
  return project_s1_detailed(v, t).value;
}

GridFunction project_s2(const GridFunction& v) {
  GridFunction out(v.rows(), v.cols());
  const auto src = v.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
  return out;
}

double row_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("row_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

S1Certificate oracle_s1(std::span<const double> v_row, const NormTarget& t, std::size_t samples,
                        std::uint64_t seed) {
  t.validate();
  const std::size_t n = v_row.size();
  if (n < 2) throw ConfigError("oracle_s1: need at least two entries per row");
  if (row_stats(v_row).variance < t.epsilon) {
    throw ConfigError("oracle_s1: constant row has no unique projection");
  }

  const GridFunction v(1, n, {v_row.begin(), v_row.end()});
  const GridFunction p = project_s1(v, t);

  S1Certificate cert;
  cert.input.assign(v_row.begin(), v_row.end());
  cert.sigma1 = t.sigma1;
  cert.sigma2 = t.sigma2;
  cert.samples = samples;
  cert.seed = seed;
  cert.closed_form_distance = row_distance(p.row(0), v_row);
  cert.best_sampled_distance = std::numeric_limits<double>::infinity();
  cert.pass = true;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(n);
  for (std::size_t s = 0; s < samples; ++s) {
    RowStats st;
    do {
      for (double& x : w) x = normal(rng);
      st = row_stats(w);
    } while (st.variance < 1e-300);
    const double scale = t.sigma2 / std::sqrt(st.variance);
    for (double& x : w) x = (x - st.mean) * scale + t.sigma1;

    const double d = row_distance(w, v_row);
    if (d < cert.best_sampled_distance) cert.best_sampled_distance = d;
    if (cert.closed_form_distance > d + 1e-9) cert.pass = false;
  }
  return cert;
}

}  // namespace opsplit
