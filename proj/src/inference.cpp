#include "plsm/inference.hpp"

#include <cmath>

namespace plsm {

double sigma2_hat(const Vector& y, const Vector& fitted, double trace_S) {
  if (y.size() != fitted.size()) throw InputError("response and fitted lengths differ");
  const double n = static_cast<double>(y.size());
  if (!(trace_S < n)) throw NumericalError("no residual degrees of freedom: trace of the smoothing matrix >= n");
  return (y - fitted).squaredNorm() / (n - trace_S);
}

Vector scad_sigma_diagonal(const Vector& beta_active, const Vector& scales, const ScadPenalty& pen) {
  if (beta_active.size() != scales.size()) throw InputError("coefficient and scale lengths differ");
  Vector out(beta_active.size());
  for (Eigen::Index j = 0; j < beta_active.size(); ++j) {
    const double b = std::abs(beta_active[j]);
    if (b < 1e-12) throw NumericalError("active coefficient is numerically zero; sandwich weight undefined");
    out[j] = scales[j] * scad_derivative(scales[j] * b, pen) / b;
  }
  return out;
}

namespace {

Matrix gram(const Matrix& z, const Matrix& z_hat) {
  if (z.rows() != z_hat.rows() || z.cols() != z_hat.cols()) throw InputError("covariate and smoothed shapes differ");
  const Matrix d = z - z_hat;
  return d.transpose() * d;
}

}  // namespace

double trace_S(const Matrix& z_active, const Matrix& z_hat_active, const Vector& sigma_diag, double spline_trace) {
  if (z_active.cols() == 0) return spline_trace;
  const Matrix a = gram(z_active, z_hat_active);
  const double n = static_cast<double>(z_active.rows());
  Matrix m = a;
  m.diagonal() += n * sigma_diag;
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) throw NumericalError("parametric block of the smoothing matrix is singular");
  return lu.solve(a).trace() + spline_trace;
}

CovarianceReport sandwich_cov(const Matrix& z_active, const Matrix& z_hat_active, const Vector& sigma_diag,
                              double sigma2) {
  CovarianceReport rep;
  rep.sigma2_hat = sigma2;
  const Eigen::Index q = z_active.cols();
  if (q == 0) {
    rep.cov_beta.resize(0, 0);
    rep.se.resize(0);
    return rep;
  }
  const Matrix a = gram(z_active, z_hat_active);
  const double n = static_cast<double>(z_active.rows());
  Matrix m = a;
  m.diagonal() += n * sigma_diag;
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) throw NumericalError("parametric block of the sandwich is singular");
  const Matrix minv = lu.inverse();
  Matrix cov = sigma2 * minv * a * minv;
  rep.cov_beta = 0.5 * (cov + cov.transpose());
  rep.se = rep.cov_beta.diagonal().cwiseMax(0.0).cwiseSqrt();
  return rep;
}

}  // namespace plsm
