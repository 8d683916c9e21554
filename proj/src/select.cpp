#include "plsm/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plsm {

ScadPenalty::ScadPenalty(double lambda2, double shape) : lambda(lambda2), a(shape) {
  if (!(shape > 2.0)) throw InputError("SCAD shape parameter a must exceed 2");
  if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) throw InputError("SCAD lambda must be finite and nonnegative");
}

double scad_value(double beta, const ScadPenalty& pen) {
  if (beta < 0.0) throw InputError("scad_value expects a nonnegative argument");
  const double l = pen.lambda;
  const double a = pen.a;
  if (beta <= l) return l * beta;
  if (beta <= a * l) return -(beta * beta - 2.0 * a * l * beta + l * l) / (2.0 * (a - 1.0));
  return (a + 1.0) * l * l / 2.0;
}

double scad_derivative(double beta, const ScadPenalty& pen) {
  if (beta < 0.0) throw InputError("scad_derivative expects a nonnegative argument");
  const double l = pen.lambda;
  if (beta <= l) return l;
  return std::max(pen.a * l - beta, 0.0) / (pen.a - 1.0);
}

namespace {

double soft(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace

double scad_threshold(double z, const ScadPenalty& pen) {
  const double l = pen.lambda;
  const double a = pen.a;
  const double az = std::abs(z);
  if (az <= 2.0 * l) return soft(z, l);
  if (az <= a * l) return soft(z, a * l / (a - 1.0)) / (1.0 - 1.0 / (a - 1.0));
  return z;
}

Vector column_scales(const Matrix& z) {
  const double n = static_cast<double>(z.rows());
  Vector s(z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) s[j] = n > 0 ? std::sqrt(z.col(j).squaredNorm() / n) : 0.0;
  return s;
}

double penalized_objective(const Vector& y, const Matrix& z, const Vector& beta, const ScadPenalty& pen) {
  const Vector s = column_scales(z);
  double pen_sum = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) pen_sum += scad_value(s[j] * std::abs(beta[j]), pen);
  return 0.5 * (y - z * beta).squaredNorm() + static_cast<double>(y.size()) * pen_sum;
}

CoordinateDescentResult coordinate_descent(const Vector& y, const Matrix& z, const ScadPenalty& pen,
                                           const CoordinateDescentConfig& cfg, const Vector& beta_init) {
  const Eigen::Index n = z.rows();
  const Eigen::Index p = z.cols();
  if (y.size() != n) throw InputError("response and covariate row counts differ");
  if (beta_init.size() != 0 && beta_init.size() != p) throw InputError("initial coefficient vector has the wrong length");
  if (cfg.max_iter < 1 || !(cfg.tol > 0.0)) throw InputError("coordinate descent needs max_iter >= 1 and tol > 0");

  const double nd = static_cast<double>(n);
  const Vector s = column_scales(z);
  Matrix x = z;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (s[j] > 0.0) x.col(j) /= s[j];
  }
  Vector b = Vector::Zero(p);
  if (beta_init.size() == p) {
    for (Eigen::Index j = 0; j < p; ++j) b[j] = s[j] > 0.0 ? beta_init[j] * s[j] : 0.0;
  }
  Vector r = y - x * b;

  auto objective = [&] {
    double pen_sum = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) pen_sum += scad_value(std::abs(b[j]), pen);
    return 0.5 * r.squaredNorm() + nd * pen_sum;
  };
  // One coordinate pass over idx; returns the largest coefficient change.
  auto sweep = [&](const std::vector<Eigen::Index>& idx) {
    double change = 0.0;
    for (Eigen::Index j : idx) {
      if (s[j] <= 0.0) continue;
      const double zj = b[j] + x.col(j).dot(r) / nd;
      const double nb = scad_threshold(zj, pen);
      const double delta = nb - b[j];
      if (delta != 0.0) {
        r.noalias() -= delta * x.col(j);
        b[j] = nb;
        change = std::max(change, std::abs(delta));
      }
    }
    return change;
  };

  std::vector<Eigen::Index> all(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) all[static_cast<std::size_t>(j)] = j;

  CoordinateDescentResult result;
  int sweeps = 0;
  while (sweeps < cfg.max_iter) {
    const double change = sweep(all);
    ++sweeps;
    result.objective.push_back(objective());
    if (change <= cfg.tol * std::max(1.0, b.cwiseAbs().maxCoeff())) {
      result.converged = true;
      break;
    }
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (b[j] != 0.0) active.push_back(j);
    }
    while (sweeps < cfg.max_iter) {
      const double inner = sweep(active);
      ++sweeps;
      if (inner <= cfg.tol * std::max(1.0, b.cwiseAbs().maxCoeff())) break;
    }
  }
  result.iterations = sweeps;
  result.beta.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) result.beta[j] = s[j] > 0.0 ? b[j] / s[j] : 0.0;
  return result;
}

double lambda_max(const Vector& y, const Matrix& z) {
  const Vector s = column_scales(z);
  const double n = static_cast<double>(z.rows());
  double best = 0.0;
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    if (s[j] > 0.0) best = std::max(best, std::abs(Vector(z.col(j) / s[j]).dot(y) / n));
  }
  return best;
}

std::vector<double> default_lambda2_grid(double lmax, int count, double ratio) {
  if (count < 1) throw InputError("lambda2 grid needs at least one point");
  if (!(lmax > 0.0)) return {1.0};
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    grid[static_cast<std::size_t>(i)] = lmax * std::pow(ratio, t);
  }
  return grid;
}

BicResult bic_select(const Vector& y, const Matrix& z, const std::vector<double>& grid,
                     const CoordinateDescentConfig& cfg) {
  if (grid.empty()) throw InputError("lambda2 grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] > grid[i - 1]) throw InputError("lambda2 grid must be sorted in descending order");
  }
  const double n = static_cast<double>(y.size());
  BicResult result;
  Vector warm = Vector::Zero(z.cols());
  for (double lambda : grid) {
    const auto cd = coordinate_descent(y, z, ScadPenalty(lambda), cfg, warm);
    BicRow row;
    row.lambda = lambda;
    row.beta = cd.beta;
    row.rss = (y - z * cd.beta).squaredNorm();
    row.df = static_cast<int>((cd.beta.array() != 0.0).count());
    row.bic = row.rss > 0.0 ? n * std::log(row.rss / n) + row.df * std::log(n)
                            : -std::numeric_limits<double>::infinity();
    row.iterations = cd.iterations;
    row.converged = cd.converged;
    warm = cd.beta;
    result.path.push_back(std::move(row));
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : result.path) best = std::min(best, row.bic);
  const double slack = std::isfinite(best) ? 1e-12 * std::max(1.0, std::abs(best)) : 0.0;
  bool found = false;
  for (std::size_t i = 0; i < result.path.size(); ++i) {
    const auto& row = result.path[i];
    if (row.bic <= best + slack && (!found || row.lambda > result.lambda)) {
      result.lambda = row.lambda;
      result.index = i;
      found = true;
    }
  }
  result.beta = result.path[result.index].beta;
  return result;
}

}  // namespace plsm
