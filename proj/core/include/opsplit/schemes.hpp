#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "opsplit/grid.hpp"

namespace opsplit {

/// Generic operator-splitting integrators for u_t + sum_k A_k(t; u) = 0.

using State = std::vector<double>;

/// Advances v_t + coeff * A(t; v) = 0 from t to t + dt and returns v(t + dt).
/// Lie splitting calls it with coeff = 1, parallel splitting with coeff = K.
using SubstepSolver = std::function<State(const State& v, double t, double dt, double coeff)>;

struct TimeSpan {
  double start = 0.0;
  double end = 1.0;
};

/// Sequential (Lie) splitting: every step runs the sub-solvers one after the
/// other, each starting from the previous one's result.
State lie_solve(std::span<const SubstepSolver> ops, State u0, TimeSpan span, std::size_t n_steps);

/// Parallel splitting: every step runs all sub-solvers from the same state
/// with coefficient K and averages the K results in operator order.
State parallel_solve(std::span<const SubstepSolver> ops, State u0, TimeSpan span,
                     std::size_t n_steps);

/// exp(a) for a small dense square matrix by scaling and squaring of a
/// truncated Taylor series.
Matrix matrix_exponential(const Matrix& a);

/// Exact sub-solver for a constant linear operator A: v -> exp(-coeff dt A) v.
SubstepSolver linear_exact_solver(Matrix a);

/// u_t + sum_k A_k u = 0 with constant matrices, plus its exact solution.
struct LinearSplitProblem {
  std::string name;
  std::vector<Matrix> operators;
  State u0;
  TimeSpan span;

  /// exp(-(t1 - t0) sum_k A_k) u0 via matrix_exponential.
  State reference() const;
  std::vector<SubstepSolver> exact_solvers() const;
};

/// A = [[0,1],[0,0]], B = [[0,0],[1,0]], u0 = (1, 0), T = 1. [A, B] != 0.
LinearSplitProblem noncommuting_2x2_problem();

/// u' = u written as u_t + A1 u + A2 u = 0 with A1 = A2 = -1/2; u0 = 1, T = 1.
LinearSplitProblem commuting_scalar_problem();

enum class SplitScheme { lie, parallel };
std::string to_string(SplitScheme s);

struct OrderRow {
  std::size_t n_steps = 0;
  double dt = 0.0;
  double error = 0.0;
  /// log2(previous error / this error); zero on the first row.
  double observed_order = 0.0;
};

struct OrderStudy {
  std::string problem;
  SplitScheme scheme = SplitScheme::lie;
  std::vector<OrderRow> rows;
  /// Least-squares slope of log(error) against log(dt).
  double fitted_order = 0.0;
  double max_error = 0.0;
};

/// Runs `scheme` on `problem` for each step count and measures the max-norm
/// error against the exact solution.
OrderStudy measure_order(const LinearSplitProblem& problem, SplitScheme scheme,
                         std::span<const std::size_t> step_counts);

/// Step counts 8, 16, 32, 64, 128 (dt = 2^-3 .. 2^-7 on a unit interval).
std::vector<std::size_t> default_step_counts();

}  // namespace opsplit
