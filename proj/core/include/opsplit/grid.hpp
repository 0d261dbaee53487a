#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace opsplit {

/// Raised when operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for structurally invalid configurations (empty head list, even
/// convolution kernel, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of doubles.
///
/// Used both as a grid function on the token x embedding grid (rows are
/// tokens, columns are embedding entries) and as a kernel acting on the
/// embedding axis. Grid spacing is fixed at one in every direction, so
/// discrete integrals are plain sums.
class Matrix {
 public:
  Matrix() = default;

  /// Zero-filled rows x cols matrix. Both extents must be positive.
  Matrix(std::size_t rows, std::size_t cols);

  /// Takes ownership of row-major `values`; rejects size mismatch and
  /// non-finite entries.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix filled(std::size_t rows, std::size_t cols, double value);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double operator()(std::size_t r, std::size_t c) const noexcept { return values_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const noexcept {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) noexcept { return {values_.data() + r * cols_, cols_}; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// u(x_k, y_l) sampled on the n_x x n_y grid: one row per token.
using GridFunction = Matrix;
/// Discrete integral kernel (W^Q, W_j, E, B, ...).
using Kernel = Matrix;

/// Sum_l a_l * b_l, accumulated left to right.
double inner_product_y(std::span<const double> a, std::span<const double> b);

/// Standard matrix product with a fixed summation order.
Matrix matmul(const Matrix& a, const Matrix& b);

/// a * b^T without materialising the transpose.
Matrix matmul_transposed(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

/// Row-wise softmax. Each row is shifted by its maximum before
/// exponentiation; the result is unchanged mathematically.
Matrix softmax2(const Matrix& scores);

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

/// max_{k,l} |a_kl - b_kl|; shapes must match.
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Throws DimensionError unless `m` is rows x cols.
void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& what);

}  // namespace opsplit
