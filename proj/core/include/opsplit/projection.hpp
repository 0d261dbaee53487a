#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "opsplit/grid.hpp"

namespace opsplit {

/// Target row statistics for the normalization constraint set: every row of
/// the projected state has mean `sigma1` and (population) variance sigma2^2.
struct NormTarget {
  double sigma1 = 0.0;
  double sigma2 = 1.0;
  /// Rows whose variance falls below this floor are treated as constant.
  double epsilon = 1e-12;

  void validate() const;
  friend bool operator==(const NormTarget&, const NormTarget&) = default;
};

struct RowStats {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and 1/n variance of a row.
RowStats row_stats(std::span<const double> row);

struct S1Projection {
  GridFunction value;
  /// Indices of rows whose variance fell below the floor; these map to the
  /// constant sigma1 row.
  std::vector<std::size_t> degenerate_rows;
};

/// Nearest point (row by row, Euclidean) with prescribed mean and variance:
/// out = sigma2 (v - mean) / sqrt(var) + sigma1.
S1Projection project_s1_detailed(const GridFunction& v, const NormTarget& t);
GridFunction project_s1(const GridFunction& v, const NormTarget& t);

/// Nearest point in the nonnegative orthant, i.e. entrywise ReLU. Negative
/// zero maps to +0.
GridFunction project_s2(const GridFunction& v);

/// Outcome of the randomized optimality check for project_s1 on one row.
struct S1Certificate {
  std::vector<double> input;
  double sigma1 = 0.0;
  double sigma2 = 1.0;
  double closed_form_distance = 0.0;
  double best_sampled_distance = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  bool pass = false;
};

/// Draws `samples` random feasible rows (centre a Gaussian vector, rescale to
/// variance sigma2^2, shift to mean sigma1) and checks that none lies closer
/// to `v_row` than the closed-form projection, up to a 1e-9 slack.
/// Requires n_y >= 2 and a non-constant row; throws ConfigError otherwise.
S1Certificate oracle_s1(std::span<const double> v_row, const NormTarget& t, std::size_t samples,
                        std::uint64_t seed);

/// Euclidean distance between two rows of equal length.
double row_distance(std::span<const double> a, std::span<const double> b);

}  // namespace opsplit
