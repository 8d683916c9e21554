#include "plsm/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plsm {

PenalizedSystem::PenalizedSystem(std::shared_ptr<const PenalizedBasis> basis, const SparseMatrix& b, double lambda)
    : basis_(std::move(basis)), lambda_(lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InputError("lambda must be a finite nonnegative number");
  if (b.cols() != basis_->space().size()) throw InputError("basis matrix has the wrong number of columns");
  g_ = b * basis_->q2();
  gtg_ = g_.transpose() * g_;
  m_ = gtg_;
  if (lambda_ > 0.0) m_ += lambda_ * basis_->reduced_penalty();

  auto factor_ok = [this] {
    llt_.compute(m_);
    if (llt_.info() != Eigen::Success) return false;
    const auto diag = llt_.matrixLLT().diagonal().cwiseAbs2();
    return diag.size() == 0 || diag.minCoeff() > 1e-13 * diag.maxCoeff();
  };
  if (!factor_ok()) {
    jitter_ = 1e-10 * m_.trace() / static_cast<double>(basis_->space().size());
    m_.diagonal().array() += jitter_;
    if (!factor_ok()) {
      throw NumericalError("penalized system is singular: too few observations for the basis supports (lambda = " +
                           std::to_string(lambda_) + ")");
    }
  }
}

SmootherFit PenalizedSystem::solve_theta(const Vector& rhs) const {
  if (rhs.size() != g_.rows()) throw InputError("response length does not match the basis matrix");
  SmootherFit fit;
  fit.theta = llt_.solve(g_.transpose() * rhs);
  fit.gamma = basis_->q2() * fit.theta;
  fit.fitted = g_ * fit.theta;
  fit.trace_hat = hat_trace();
  return fit;
}

double PenalizedSystem::hat_trace() const { return llt_.solve(gtg_).trace(); }

Matrix PenalizedSystem::apply_hat(const Matrix& columns) const {
  if (columns.rows() != g_.rows()) throw InputError("column length does not match the basis matrix");
  return g_ * llt_.solve(g_.transpose() * columns);
}

SpectralSmoother::SpectralSmoother(std::shared_ptr<const PenalizedBasis> basis, const SparseMatrix& b)
    : basis_(std::move(basis)), n_(b.rows()), b_(b) {
  if (b.cols() != basis_->space().size()) throw InputError("basis matrix has the wrong number of columns");
  const PenaltySpectrum& spec = basis_->spectrum();
  t_ = b_ * spec.null_part;
  f_ = b_ * spec.scaled_part;

  t_qr_.setThreshold(1e-10);
  t_qr_.compute(t_);
  rank_t_ = t_qr_.rank();
  qt_ = Matrix(t_qr_.householderQ()).leftCols(rank_t_);

  const Matrix ft = f_ - qt_ * (qt_.transpose() * f_);
  const Eigen::Index m1 = ft.cols();
  Vector values;
  Matrix vectors;
  const bool wide = n_ <= m1;
  if (wide) {
    symmetric_eigen(ft * ft.transpose(), values, vectors);
  } else {
    symmetric_eigen(ft.transpose() * ft, values, vectors);
  }
  const double top = values.size() ? std::max(values.maxCoeff(), 0.0) : 0.0;
  const double tol = static_cast<double>(std::max<Eigen::Index>(n_, m1)) * std::numeric_limits<double>::epsilon() * top;
  Eigen::Index first = 0;
  while (first < values.size() && values[first] <= tol) ++first;
  const Eigen::Index keep = values.size() - first;
  s_ = values.tail(keep);
  if (wide) {
    u_ = vectors.rightCols(keep);
    w_ = ft.transpose() * u_;
  } else {
    const Matrix v = vectors.rightCols(keep);
    u_ = ft * v * s_.cwiseSqrt().cwiseInverse().asDiagonal();
    w_ = v * s_.cwiseSqrt().asDiagonal();
  }
}

double SpectralSmoother::hat_trace(double lambda) const {
  return static_cast<double>(rank_t_) + (s_.array() / (s_.array() + lambda)).sum();
}

Matrix SpectralSmoother::apply_hat(double lambda, const Matrix& columns) const {
  if (columns.rows() != n_) throw InputError("column length does not match the number of observations");
  const Vector weights = (s_.array() / (s_.array() + lambda)).matrix();
  return qt_ * (qt_.transpose() * columns) + u_ * (weights.asDiagonal() * (u_.transpose() * columns));
}

Vector SpectralSmoother::apply_hat(double lambda, const Vector& column) const {
  return apply_hat(lambda, Matrix(column)).col(0);
}

Vector SpectralSmoother::projected_coordinates(const Vector& y) const {
  const Vector yt = y - qt_ * (qt_.transpose() * y);
  return u_.transpose() * yt;
}

double SpectralSmoother::rss(double lambda, const Vector& y) const {
  if (y.size() != n_) throw InputError("response length does not match the number of observations");
  const Vector yt = y - qt_ * (qt_.transpose() * y);
  const Vector c = u_.transpose() * yt;
  const Eigen::ArrayXd w = s_.array() / (s_.array() + lambda);
  const double value = yt.squaredNorm() - ((2.0 * w - w.square()) * c.array().square()).sum();
  return std::max(value, 0.0);
}

Vector SpectralSmoother::solve_gamma(double lambda, const Vector& y) const {
  if (y.size() != n_) throw InputError("response length does not match the number of observations");
  const Vector c = projected_coordinates(y);
  const Vector bcoef = w_ * (c.array() / (s_.array() + lambda)).matrix();
  const Vector acoef = t_qr_.solve(Vector(y - f_ * bcoef));
  const PenaltySpectrum& spec = basis_->spectrum();
  return spec.null_part * acoef + spec.scaled_part * bcoef;
}

SmootherFit SpectralSmoother::solve(double lambda, const Vector& y) const {
  SmootherFit fit;
  fit.gamma = solve_gamma(lambda, y);
  fit.fitted = b_ * fit.gamma;
  fit.trace_hat = hat_trace(lambda);
  return fit;
}

std::vector<double> default_lambda_grid(Eigen::Index n, double mesh_size, int count) {
  if (count < 1) throw InputError("lambda grid needs at least one point");
  const double scale = static_cast<double>(n) * mesh_size * mesh_size * mesh_size;
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double e = count == 1 ? -6.0 : -6.0 + 10.0 * i / (count - 1);
    grid[static_cast<std::size_t>(i)] = std::pow(10.0, e) * scale;
  }
  return grid;
}

GcvResult pick_gcv(std::vector<GcvRow> table) {
  if (table.empty()) throw InputError("lambda grid is empty");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : table) best = std::min(best, row.gcv);
  if (!std::isfinite(best)) {
    throw NumericalError("GCV undefined on the whole grid: hat trace reaches the sample size (oversaturated basis)");
  }
  GcvResult result;
  bool found = false;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].gcv <= best * (1.0 + 1e-12) && (!found || table[i].lambda > result.lambda)) {
      result.lambda = table[i].lambda;
      result.index = i;
      found = true;
    }
  }
  result.table = std::move(table);
  return result;
}

GcvResult gcv_select(const SpectralSmoother& smoother, const Vector& y, const std::vector<double>& grid) {
  if (grid.empty()) throw InputError("lambda grid is empty");
  const double n = static_cast<double>(smoother.num_obs());
  std::vector<GcvRow> table;
  table.reserve(grid.size());
  for (double lambda : grid) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("lambda grid values must be positive");
    GcvRow row;
    row.lambda = lambda;
    row.rss = smoother.rss(lambda, y);
    row.trace = smoother.hat_trace(lambda);
    const double dof = n - row.trace;
    row.gcv = dof > 1e-8 * n ? n * row.rss / (dof * dof) : std::numeric_limits<double>::infinity();
    table.push_back(row);
  }
  return pick_gcv(std::move(table));
}

Matrix smooth_columns(const SpectralSmoother& smoother, const Matrix& columns, double lambda) {
  return smoother.apply_hat(lambda, columns);
}

}  // namespace plsm
