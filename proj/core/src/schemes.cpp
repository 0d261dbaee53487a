#include "opsplit/schemes.hpp"

#include <algorithm>
#include <cmath>

namespace opsplit {

namespace {

void check_steps(std::span<const SubstepSolver> ops, std::size_t n_steps) {
  if (n_steps < 1) throw ConfigError("splitting: n_steps must be at least 1");
  if (ops.empty()) throw ConfigError("splitting: at least one operator is required");
}

State mat_vec(const Matrix& m, const State& v) {
  if (m.cols() != v.size()) throw DimensionError("operator/state size mismatch");
  State out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

double max_norm(const Matrix& a) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double row = 0.0;
    for (double v : a.row(i)) row += std::abs(v);
    worst = std::max(worst, row);
  }
  return worst;
}

}  // namespace

State lie_solve(std::span<const SubstepSolver> ops, State u0, TimeSpan span, std::size_t n_steps) {
  check_steps(ops, n_steps);
  const double dt = (span.end - span.start) / static_cast<double>(n_steps);
  State u = std::move(u0);
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t = span.start + static_cast<double>(n) * dt;
    for (const auto& op : ops) u = op(u, t, dt, 1.0);
  }
  return u;
}

State parallel_solve(std::span<const SubstepSolver> ops, State u0, TimeSpan span,
                     std::size_t n_steps) {
  check_steps(ops, n_steps);
  const double dt = (span.end - span.start) / static_cast<double>(n_steps);
  const double k = static_cast<double>(ops.size());
  State u = std::move(u0);
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t = span.start + static_cast<double>(n) * dt;
    State sum(u.size(), 0.0);
    for (const auto& op : ops) {
      const State v = op(u, t, dt, k);
      if (v.size() != u.size()) throw DimensionError("parallel_solve: sub-solver changed state size");
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
    }
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] /= k;
    u = std::move(sum);
  }
  return u;
}

Matrix matrix_exponential(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("matrix_exponential: matrix must be square");
  const std::size_t n = a.rows();

  // Scale so that ||a / 2^s|| <= 1/2, sum the Taylor series to convergence,
  // then square s times.
  int squarings = 0;
  const double norm = max_norm(a);
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const double scale = std::ldexp(1.0, -squarings);
  const Matrix scaled = scale * a;

  Matrix result = Matrix::identity(n);
  Matrix term = Matrix::identity(n);
  for (int k = 1; k <= 30; ++k) {
    term = (1.0 / k) * matmul(term, scaled);
    result = result + term;
    double biggest = 0.0;
    for (double v : term.values()) biggest = std::max(biggest, std::abs(v));
    if (biggest == 0.0 || biggest < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) result = matmul(result, result);
  return result;
}

SubstepSolver linear_exact_solver(Matrix a) {
  return [a = std::move(a)](const State& v, double, double dt, double coeff) {
    return mat_vec(matrix_exponential((-coeff * dt) * a), v);
  };
}

State LinearSplitProblem::reference() const {
  if (operators.empty()) throw ConfigError("linear problem has no operators");
  Matrix total = operators.front();
  for (std::size_t k = 1; k < operators.size(); ++k) total = total + operators[k];
  return mat_vec(matrix_exponential((-(span.end - span.start)) * total), u0);
}

std::vector<SubstepSolver> LinearSplitProblem::exact_solvers() const {
  std::vector<SubstepSolver> out;
  out.reserve(operators.size());
  for (const auto& op : operators) out.push_back(linear_exact_solver(op));
  return out;
}

LinearSplitProblem noncommuting_2x2_problem() {
  return {"noncommuting-2x2",
          {Matrix::from_rows({{0.0, 1.0}, {0.0, 0.0}}), Matrix::from_rows({{0.0, 0.0}, {1.0, 0.0}})},
          {1.0, 0.0},
          {0.0, 1.0}};
}

LinearSplitProblem commuting_scalar_problem() {
  return {"commuting-scalar",
          {Matrix::from_rows({{-0.5}}), Matrix::from_rows({{-0.5}})},
          {1.0},
          {0.0, 1.0}};
}

std::string to_string(SplitScheme s) { return s == SplitScheme::lie ? "lie" : "parallel"; }

OrderStudy measure_order(const LinearSplitProblem& problem, SplitScheme scheme,
                         std::span<const std::size_t> step_counts) {
  const State exact = problem.reference();
  const auto solvers = problem.exact_solvers();

  OrderStudy study;
  study.problem = problem.name;
  study.scheme = scheme;
  for (std::size_t n : step_counts) {
    const State u = scheme == SplitScheme::lie ? lie_solve(solvers, problem.u0, problem.span, n)
                                               : parallel_solve(solvers, problem.u0, problem.span, n);
    OrderRow row;
    row.n_steps = n;
    row.dt = (problem.span.end - problem.span.start) / static_cast<double>(n);
    for (std::size_t i = 0; i < u.size(); ++i) row.error = std::max(row.error, std::abs(u[i] - exact[i]));
    if (!study.rows.empty() && row.error > 0.0 && study.rows.back().error > 0.0) {
      row.observed_order = std::log2(study.rows.back().error / row.error) /
                           std::log2(study.rows.back().dt / row.dt);
    }
    study.max_error = std::max(study.max_error, row.error);
    study.rows.push_back(row);
  }

  // Fit only over rows with a measurable error.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (const auto& r : study.rows) {
    if (r.error <= 0.0) continue;
    const double x = std::log(r.dt);
    const double y = std::log(r.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count >= 2) {
    const double c = static_cast<double>(count);
    study.fitted_order = (c * sxy - sx * sy) / (c * sxx - sx * sx);
  }
  return study;
}

std::vector<std::size_t> default_step_counts() { return {8, 16, 32, 64, 128}; }

}  // namespace opsplit
