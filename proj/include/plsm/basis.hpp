#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "plsm/common.hpp"
#include "plsm/mesh.hpp"

namespace plsm {

/// Bernstein–Bézier spline space S^r_d over a triangulation.
///
/// Coefficients are stored triangle by triangle in mesh file order. Within a
/// triangle the multi-index (i, j, k), i + j + k = d, is ordered by descending
/// i, then descending j; i, j, k are the exponents of the barycentric
/// coordinates of the triangle's first, second and third (counter-clockwise)
/// vertex.
class SplineSpace {
 public:
  SplineSpace(std::shared_ptr<const Triangulation> mesh, int degree, int smoothness);

  const Triangulation& mesh() const { return *mesh_; }
  const std::shared_ptr<const Triangulation>& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  int smoothness() const { return smoothness_; }
  int dofs_per_triangle() const { return dofs_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(mesh_->num_triangles()) * dofs_; }

  int local_index(int i, int j, int k) const;
  Eigen::Index index(int t, int i, int j, int k) const {
    return static_cast<Eigen::Index>(t) * dofs_ + local_index(i, j, k);
  }
  const std::vector<std::array<int, 3>>& multi_indices() const { return multi_; }

  /// Values of the dofs_per_triangle() Bernstein polynomials at b, in local order.
  void basis_values(const Barycentric& b, std::span<double> out) const;

 private:
  std::shared_ptr<const Triangulation> mesh_;
  int degree_;
  int smoothness_;
  int dofs_;
  std::vector<std::array<int, 3>> multi_;
  std::vector<int> offset_;  // first local index for each i
};

/// Bernstein polynomials of degree d at b, ordered like SplineSpace::multi_indices().
std::vector<double> bernstein_all(int d, const Barycentric& b);

/// n x K evaluation matrix; row i holds the basis of the triangle containing points[i].
SparseMatrix eval_basis_matrix(const SplineSpace& space, std::span<const Point2> points);

/// Cross-edge C^0..C^r continuity conditions; feasible coefficients satisfy H gamma = 0.
SparseMatrix smoothness_matrix(const SplineSpace& space);

/// Block-diagonal thin-plate energy matrix with gamma' P gamma = ∫ s_xx² + 2 s_xy² + s_yy².
struct PenaltyMatrix {
  int block = 0;
  std::vector<Matrix> blocks;

  Eigen::Index size() const { return static_cast<Eigen::Index>(blocks.size()) * block; }
  double quadratic(const Vector& gamma) const;
  Matrix apply(const Matrix& x) const;
  SparseMatrix to_sparse() const;
};

PenaltyMatrix energy_matrix(const SplineSpace& space);

struct NullSpaceBasis {
  Matrix q2;               ///< K x (K - rank) orthonormal columns spanning ker H
  Eigen::Index rank = 0;   ///< numerical rank of H
};

/// Null space of H from a column-pivoted QR of H'; rank threshold 1e-9 relative to |R_11|.
NullSpaceBasis null_space_basis(const SparseMatrix& h, Eigen::Index num_coefficients);

/// Spline values at points; NaN for points outside the domain.
Vector eval_spline(const SplineSpace& space, const Vector& gamma, std::span<const Point2> points);

/// Value and Cartesian derivatives up to second order of one polynomial piece.
struct Jet {
  double value = 0, dx = 0, dy = 0, dxx = 0, dxy = 0, dyy = 0;
};

/// Evaluates the piece on triangle t at p (p need not lie inside t).
Jet eval_jet(const SplineSpace& space, const Vector& gamma, int t, const Point2& p);

/// Per-triangle Bézier interpolation of f at the domain points; exact for polynomials of degree <= d.
Vector bezier_interpolant(const SplineSpace& space, const std::function<double(const Point2&)>& f);

/// Gauss–Legendre rule on a collapsed triangle with n points per direction:
/// exact for polynomials of total degree <= 2n - 2 on the reference triangle.
struct TriangleRule {
  std::vector<Barycentric> points;
  std::vector<double> weights;  ///< sum to 1 (multiply by the triangle area)
};
TriangleRule triangle_rule(int n);

}  // namespace plsm
