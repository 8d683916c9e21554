#pragma once

#include <memory>
#include <vector>

#include "plsm/space.hpp"

namespace plsm {

struct SmootherFit {
  Vector theta;   ///< reduced coefficients (only set by PenalizedSystem)
  Vector gamma;   ///< Bernstein coefficients, H * gamma = 0
  Vector fitted;  ///< B * gamma
  double trace_hat = 0.0;
};

/// Direct solver for a fixed lambda: Cholesky of M(lambda) = Q2'(B'B + lambda P)Q2.
class PenalizedSystem {
 public:
  PenalizedSystem(std::shared_ptr<const PenalizedBasis> basis, const SparseMatrix& b, double lambda);

  double lambda() const { return lambda_; }
  /// Ridge added to M(lambda) after a failed first factorization (0 when none was needed).
  double jitter() const { return jitter_; }
  const Matrix& system_matrix() const { return m_; }
  /// G = B Q2.
  const Matrix& design() const { return g_; }

  SmootherFit solve_theta(const Vector& rhs) const;
  /// tr H_B(lambda) = tr(M^{-1} G'G).
  double hat_trace() const;
  /// H_B(lambda) applied to every column.
  Matrix apply_hat(const Matrix& columns) const;

 private:
  std::shared_ptr<const PenalizedBasis> basis_;
  double lambda_;
  double jitter_ = 0.0;
  Matrix g_;
  Matrix gtg_;
  Matrix m_;
  Eigen::LLT<Matrix> llt_;
};

/// Fast smoother for one design and many lambdas.
///
/// Writes gamma = N a + S b with N spanning the zero-energy splines and S
/// whitening the penalty, so the fit is ridge regression on S with the affine
/// part unpenalized. One eigen-decomposition per design then gives the hat
/// operator, its trace and the residual sum of squares for every lambda in
/// closed form.
class SpectralSmoother {
 public:
  SpectralSmoother(std::shared_ptr<const PenalizedBasis> basis, const SparseMatrix& b);

  Eigen::Index num_obs() const { return n_; }
  const PenalizedBasis& basis() const { return *basis_; }

  double hat_trace(double lambda) const;
  Matrix apply_hat(double lambda, const Matrix& columns) const;
  Vector apply_hat(double lambda, const Vector& column) const;
  double rss(double lambda, const Vector& y) const;
  /// Bernstein coefficients of the penalized fit of y.
  Vector solve_gamma(double lambda, const Vector& y) const;
  SmootherFit solve(double lambda, const Vector& y) const;

 private:
  Vector projected_coordinates(const Vector& y) const;

  std::shared_ptr<const PenalizedBasis> basis_;
  Eigen::Index n_ = 0;
  SparseMatrix b_;
  Matrix t_;                                 // B N
  Matrix f_;                                 // B S
  Matrix qt_;                                // orthonormal basis of range(T)
  Eigen::ColPivHouseholderQR<Matrix> t_qr_;
  Eigen::Index rank_t_ = 0;
  Matrix u_;                                 // eigenvectors of (I - P_T) F F' (I - P_T), nonzero part
  Vector s_;                                 // matching eigenvalues
  Matrix w_;                                 // F~' U
};

struct GcvRow {
  double lambda = 0.0;
  double rss = 0.0;
  double trace = 0.0;
  double gcv = 0.0;  ///< +inf where trace >= n
};

struct GcvResult {
  double lambda = 0.0;
  std::size_t index = 0;
  std::vector<GcvRow> table;
};

/// 50 log-spaced values over [1e-6, 1e4] * n * |mesh|^3.
std::vector<double> default_lambda_grid(Eigen::Index n, double mesh_size, int count = 50);

/// GCV(lambda) = n RSS / (n - tr H)^2 minimized over the grid, ties toward larger lambda.
GcvResult gcv_select(const SpectralSmoother& smoother, const Vector& y, const std::vector<double>& grid);

/// Picks the minimizing row of a GCV table (ties toward larger lambda); throws if none is finite.
GcvResult pick_gcv(std::vector<GcvRow> table);

/// H_B(lambda) applied to each column.
Matrix smooth_columns(const SpectralSmoother& smoother, const Matrix& columns, double lambda);

}  // namespace plsm
