#pragma once

#include "plsm/common.hpp"
#include "plsm/select.hpp"

namespace plsm {

struct CovarianceReport {
  Matrix cov_beta;  ///< q x q, active coefficients only
  Vector se;
  double sigma2_hat = 0.0;
  double trace_S = 0.0;
};

/// |y - fitted|^2 / (n - trace_S).
double sigma2_hat(const Vector& y, const Vector& fitted, double trace_S);

/// diag(s_j p'(s_j |beta_j|) / |beta_j|): the local quadratic curvature of the SCAD term on the original scale
/// of columns with scales s (pass ones for unscaled columns).
Vector scad_sigma_diagonal(const Vector& beta_active, const Vector& scales, const ScadPenalty& pen);

/// tr[(A + n Sigma)^{-1} A] + spline_trace with A = (Z - Zhat)'(Z - Zhat).
double trace_S(const Matrix& z_active, const Matrix& z_hat_active, const Vector& sigma_diag, double spline_trace);

/// sigma2 (A + n Sigma)^{-1} A (A + n Sigma)^{-1}.
CovarianceReport sandwich_cov(const Matrix& z_active, const Matrix& z_hat_active, const Vector& sigma_diag,
                              double sigma2);

}  // namespace plsm
