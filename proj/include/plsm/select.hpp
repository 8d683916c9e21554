#pragma once

#include <vector>

#include "plsm/common.hpp"

namespace plsm {

inline constexpr double kScadA = 3.7;

struct ScadPenalty {
  double lambda = 0.0;
  double a = kScadA;

  ScadPenalty() = default;
  ScadPenalty(double lambda2, double shape = kScadA);
};

/// p(beta) for beta >= 0.
double scad_value(double beta, const ScadPenalty& pen);
/// p'(beta) for beta >= 0.
double scad_derivative(double beta, const ScadPenalty& pen);
/// Global minimizer of 0.5 (z - b)^2 + p(|b|).
double scad_threshold(double z, const ScadPenalty& pen);

struct CoordinateDescentConfig {
  int max_iter = 1000;
  double tol = 1e-7;
};

struct CoordinateDescentResult {
  Vector beta;                     ///< original column scale
  int iterations = 0;              ///< full sweeps
  bool converged = false;
  std::vector<double> objective;   ///< 0.5 |y - Z beta|^2 + n sum p(|beta_j| s_j) after each full sweep
};

/// Per-column root mean square sqrt(z_j' z_j / n); coordinate descent works on Z / scale.
Vector column_scales(const Matrix& z);

/// 0.5 |y - Z beta|^2 + n sum_j p(s_j |beta_j|) with s the column scales.
double penalized_objective(const Vector& y, const Matrix& z, const Vector& beta, const ScadPenalty& pen);

/// SCAD-penalized least squares by cyclic coordinate descent on scaled columns.
CoordinateDescentResult coordinate_descent(const Vector& y, const Matrix& z, const ScadPenalty& pen,
                                           const CoordinateDescentConfig& cfg = {}, const Vector& beta_init = {});

/// max_j |x_j' y| / n over scaled columns; the smallest lambda2 that zeroes every coefficient.
double lambda_max(const Vector& y, const Matrix& z);

/// count log-spaced values from lambda_max down to ratio * lambda_max.
std::vector<double> default_lambda2_grid(double lmax, int count = 50, double ratio = 1e-3);

struct BicRow {
  double lambda = 0.0;
  double rss = 0.0;
  int df = 0;
  double bic = 0.0;
  int iterations = 0;
  bool converged = true;
  Vector beta;
};

struct BicResult {
  double lambda = 0.0;
  std::size_t index = 0;
  Vector beta;
  std::vector<BicRow> path;
};

/// Warm-started path over a descending grid; BIC = n log(RSS/n) + df log n, ties toward larger lambda2.
BicResult bic_select(const Vector& y, const Matrix& z, const std::vector<double>& grid,
                     const CoordinateDescentConfig& cfg = {});

}  // namespace plsm
