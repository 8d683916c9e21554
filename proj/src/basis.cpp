#include "plsm/basis.hpp"

#include <lapacke.h>

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>

namespace plsm {

namespace {

int position(int d, int i, int j) { return (d - i) * (d - i + 1) / 2 + (d - i - j); }

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

std::vector<std::array<int, 3>> multi_indices_of(int d) {
  std::vector<std::array<int, 3>> out;
  for (int i = d; i >= 0; --i)
    for (int j = d - i; j >= 0; --j) out.push_back({i, j, d - i - j});
  return out;
}

// Gradients of the three barycentric coordinates of triangle t.
std::array<std::array<double, 2>, 3> barycentric_gradients(const Triangulation& mesh, int t) {
  const Point2 &p1 = mesh.vertex(t, 0), &p2 = mesh.vertex(t, 1), &p3 = mesh.vertex(t, 2);
  const double det = (p2.x - p1.x) * (p3.y - p1.y) - (p3.x - p1.x) * (p2.y - p1.y);
  std::array<std::array<double, 2>, 3> g{};
  g[1] = {(p3.y - p1.y) / det, -(p3.x - p1.x) / det};
  g[2] = {-(p2.y - p1.y) / det, (p2.x - p1.x) / det};
  g[0] = {-g[1][0] - g[2][0], -g[1][1] - g[2][1]};
  return g;
}

// Second Cartesian derivatives (xx, xy, yy) of every degree-d Bernstein polynomial at b.
void basis_hessians(int d, const Barycentric& b, const std::array<std::array<double, 2>, 3>& g,
                    std::vector<std::array<double, 3>>& out) {
  const auto multi = multi_indices_of(d);
  out.assign(multi.size(), {0.0, 0.0, 0.0});
  if (d < 2) return;
  const std::vector<double> low = bernstein_all(d - 2, b);
  const double scale = static_cast<double>(d) * (d - 1);
  for (std::size_t q = 0; q < multi.size(); ++q) {
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 3; ++l) {
        std::array<int, 3> e = multi[q];
        --e[k];
        --e[l];
        if (e[0] < 0 || e[1] < 0 || e[2] < 0) continue;
        const double v = scale * low[position(d - 2, e[0], e[1])];
        out[q][0] += v * g[k][0] * g[l][0];
        out[q][1] += v * g[k][0] * g[l][1];
        out[q][2] += v * g[k][1] * g[l][1];
      }
    }
  }
}

}  // namespace

SplineSpace::SplineSpace(std::shared_ptr<const Triangulation> mesh, int degree, int smoothness)
    : mesh_(std::move(mesh)), degree_(degree), smoothness_(smoothness) {
  if (!mesh_) throw InputError("spline space: null mesh");
  if (degree_ < 1) throw InputError("spline space: degree must be >= 1");
  if (smoothness_ < 0 || smoothness_ >= degree_)
    throw InputError("spline space: smoothness r must satisfy 0 <= r < d (got d=" + std::to_string(degree_) +
                     ", r=" + std::to_string(smoothness_) + ")");
  dofs_ = (degree_ + 1) * (degree_ + 2) / 2;
  multi_ = multi_indices_of(degree_);
}

int SplineSpace::local_index(int i, int j, int k) const {
  (void)k;
  return position(degree_, i, j);
}

void SplineSpace::basis_values(const Barycentric& b, std::span<double> out) const {
  const std::vector<double> v = bernstein_all(degree_, b);
  std::copy(v.begin(), v.end(), out.begin());
}

std::vector<double> bernstein_all(int d, const Barycentric& b) {
  std::vector<double> pw1(d + 1), pw2(d + 1), pw3(d + 1);
  pw1[0] = pw2[0] = pw3[0] = 1.0;
  for (int k = 1; k <= d; ++k) {
    pw1[k] = pw1[k - 1] * b.b1;
    pw2[k] = pw2[k - 1] * b.b2;
    pw3[k] = pw3[k - 1] * b.b3;
  }
  const double fd = factorial(d);
  std::vector<double> out;
  out.reserve((d + 1) * (d + 2) / 2);
  for (int i = d; i >= 0; --i)
    for (int j = d - i; j >= 0; --j) {
      const int k = d - i - j;
      out.push_back(fd / (factorial(i) * factorial(j) * factorial(k)) * pw1[i] * pw2[j] * pw3[k]);
    }
  return out;
}

SparseMatrix eval_basis_matrix(const SplineSpace& space, std::span<const Point2> points) {
  const int dofs = space.dofs_per_triangle();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(points.size() * dofs);
  std::vector<double> vals(dofs);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto loc = space.mesh().locate(points[i]);
    if (!loc)
      throw InputError("location row " + std::to_string(i) + " (" + std::to_string(points[i].x) + ", " +
                       std::to_string(points[i].y) + ") lies outside the triangulated domain");
    space.basis_values(loc->bary, vals);
    const Eigen::Index base = static_cast<Eigen::Index>(loc->triangle) * dofs;
    for (int q = 0; q < dofs; ++q) trips.emplace_back(static_cast<int>(i), static_cast<int>(base + q), vals[q]);
  }
  SparseMatrix b(static_cast<Eigen::Index>(points.size()), space.size());
  b.setFromTriplets(trips.begin(), trips.end());
  return b;
}

SparseMatrix smoothness_matrix(const SplineSpace& space) {
  const Triangulation& mesh = space.mesh();
  const int d = space.degree(), r = space.smoothness();
  std::vector<Eigen::Triplet<double>> trips;
  int row = 0;

  for (const Edge& e : mesh.edges()) {
    if (!e.interior()) continue;
    const int t1 = e.triangles[0], t2 = e.triangles[1];
    const auto& v1 = mesh.triangles()[t1].v;
    const auto& v2 = mesh.triangles()[t2].v;
    // Local positions of (A, B, opposite) in each triangle.
    std::array<int, 3> r1{}, r2{};
    for (int k = 0; k < 3; ++k) {
      r1[v1[k] == e.a ? 0 : (v1[k] == e.b ? 1 : 2)] = k;
      r2[v2[k] == e.a ? 0 : (v2[k] == e.b ? 1 : 2)] = k;
    }
    auto coeff = [&](int t, const std::array<int, 3>& roles, int ea, int eb, int ec) {
      std::array<int, 3> local{};
      local[roles[0]] = ea;
      local[roles[1]] = eb;
      local[roles[2]] = ec;
      return static_cast<int>(space.index(t, local[0], local[1], local[2]));
    };
    const Point2& opposite2 = mesh.vertices()[v2[r2[2]]];
    const Barycentric bl = mesh.barycentric(t1, opposite2);
    const Barycentric lam{bl[r1[0]], bl[r1[1]], bl[r1[2]]};

    for (int j = 0; j <= r; ++j) {
      const std::vector<double> w = bernstein_all(j, lam);
      const auto sub = multi_indices_of(j);
      for (int i = d - j; i >= 0; --i) {
        const int l = d - j - i;
        trips.emplace_back(row, coeff(t2, r2, i, l, j), 1.0);
        for (std::size_t q = 0; q < sub.size(); ++q) {
          if (w[q] == 0.0) continue;
          trips.emplace_back(row, coeff(t1, r1, i + sub[q][0], l + sub[q][1], sub[q][2]), -w[q]);
        }
        ++row;
      }
    }
  }
  SparseMatrix h(row, space.size());
  h.setFromTriplets(trips.begin(), trips.end());
  return h;
}

double PenaltyMatrix::quadratic(const Vector& gamma) const {
  double total = 0.0;
  for (std::size_t t = 0; t < blocks.size(); ++t) {
    auto seg = gamma.segment(static_cast<Eigen::Index>(t) * block, block);
    total += seg.dot(blocks[t] * seg);
  }
  return total;
}

Matrix PenaltyMatrix::apply(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  for (std::size_t t = 0; t < blocks.size(); ++t) {
    const Eigen::Index off = static_cast<Eigen::Index>(t) * block;
    out.middleRows(off, block).noalias() = blocks[t] * x.middleRows(off, block);
  }
  return out;
}

SparseMatrix PenaltyMatrix::to_sparse() const {
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t t = 0; t < blocks.size(); ++t) {
    const int off = static_cast<int>(t) * block;
    for (int i = 0; i < block; ++i)
      for (int j = 0; j < block; ++j)
        if (blocks[t](i, j) != 0.0) trips.emplace_back(off + i, off + j, blocks[t](i, j));
  }
  SparseMatrix p(size(), size());
  p.setFromTriplets(trips.begin(), trips.end());
  return p;
}

TriangleRule triangle_rule(int n) {
  // Gauss–Legendre on [0, 1] from the positive Legendre zeros.
  std::vector<double> xs, ws;
  for (double z : boost::math::legendre_p_zeros<double>(n)) {
    const double dp = boost::math::legendre_p_prime(n, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    xs.push_back(0.5 * (1.0 + z));
    ws.push_back(0.5 * w);
    if (z != 0.0) {
      xs.push_back(0.5 * (1.0 - z));
      ws.push_back(0.5 * w);
    }
  }
  TriangleRule rule;
  for (std::size_t a = 0; a < xs.size(); ++a) {
    for (std::size_t c = 0; c < xs.size(); ++c) {
      const double u = xs[a], v = xs[c];
      const double b2 = u, b3 = v * (1.0 - u);
      rule.points.push_back({1.0 - b2 - b3, b2, b3});
      rule.weights.push_back(2.0 * ws[a] * ws[c] * (1.0 - u));
    }
  }
  return rule;
}

PenaltyMatrix energy_matrix(const SplineSpace& space) {
  const int d = space.degree();
  if (d < 2) throw InputError("energy matrix: degree must be >= 2 (second derivatives vanish for d < 2)");
  const Triangulation& mesh = space.mesh();
  const int dofs = space.dofs_per_triangle();
  const TriangleRule rule = triangle_rule(d);

  PenaltyMatrix p;
  p.block = dofs;
  p.blocks.resize(mesh.num_triangles());
  std::vector<std::array<double, 3>> hess;
  Vector hxx(dofs), hxy(dofs), hyy(dofs);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = barycentric_gradients(mesh, static_cast<int>(t));
    Matrix blk = Matrix::Zero(dofs, dofs);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      basis_hessians(d, rule.points[q], g, hess);
      for (int k = 0; k < dofs; ++k) {
        hxx[k] = hess[k][0];
        hxy[k] = hess[k][1];
        hyy[k] = hess[k][2];
      }
      const double w = rule.weights[q] * mesh.area(static_cast<int>(t));
      blk.noalias() += w * (hxx * hxx.transpose() + 2.0 * hxy * hxy.transpose() + hyy * hyy.transpose());
    }
    p.blocks[t] = 0.5 * (blk + blk.transpose());
  }
  return p;
}

NullSpaceBasis null_space_basis(const SparseMatrix& h, Eigen::Index num_coefficients) {
  const Eigen::Index k = num_coefficients;
  NullSpaceBasis out;
  if (h.rows() == 0) {
    out.q2 = Matrix::Identity(k, k);
    return out;
  }
  if (h.cols() != k) throw InputError("null space: constraint matrix has wrong column count");
  Matrix ht = Matrix(h.transpose());
  const Eigen::Index rows = ht.cols();
  const Eigen::Index nref = std::min(k, rows);
  std::vector<lapack_int> jpvt(static_cast<std::size_t>(rows), 0);
  std::vector<double> tau(static_cast<std::size_t>(nref));
  lapack_int info = LAPACKE_dgeqp3(LAPACK_COL_MAJOR, static_cast<lapack_int>(k), static_cast<lapack_int>(rows),
                                   ht.data(), static_cast<lapack_int>(k), jpvt.data(), tau.data());
  if (info != 0) throw NumericalError("null space: dgeqp3 failed with info " + std::to_string(info));

  const double r00 = std::abs(ht(0, 0));
  Eigen::Index rank = 0;
  while (rank < nref && std::abs(ht(rank, rank)) > 1e-9 * r00) ++rank;
  out.rank = rank;

  const Eigen::Index m = k - rank;
  out.q2 = Matrix::Zero(k, m);
  for (Eigen::Index i = 0; i < m; ++i) out.q2(rank + i, i) = 1.0;
  if (m > 0) {
    info = LAPACKE_dormqr(LAPACK_COL_MAJOR, 'L', 'N', static_cast<lapack_int>(k), static_cast<lapack_int>(m),
                          static_cast<lapack_int>(nref), ht.data(), static_cast<lapack_int>(k), tau.data(),
                          out.q2.data(), static_cast<lapack_int>(k));
    if (info != 0) throw NumericalError("null space: dormqr failed with info " + std::to_string(info));
  }
  return out;
}

Vector eval_spline(const SplineSpace& space, const Vector& gamma, std::span<const Point2> points) {
  if (gamma.size() != space.size()) throw InputError("eval_spline: coefficient vector has wrong length");
  const int dofs = space.dofs_per_triangle();
  std::vector<double> vals(dofs);
  Vector out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto loc = space.mesh().locate(points[i]);
    if (!loc) {
      out[static_cast<Eigen::Index>(i)] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    space.basis_values(loc->bary, vals);
    const Eigen::Index base = static_cast<Eigen::Index>(loc->triangle) * dofs;
    double s = 0.0;
    for (int q = 0; q < dofs; ++q) s += vals[q] * gamma[base + q];
    out[static_cast<Eigen::Index>(i)] = s;
  }
  return out;
}

Jet eval_jet(const SplineSpace& space, const Vector& gamma, int t, const Point2& p) {
  const int d = space.degree();
  const Barycentric b = space.mesh().barycentric(t, p);
  const auto g = barycentric_gradients(space.mesh(), t);
  const auto& multi = space.multi_indices();
  const Eigen::Index base = static_cast<Eigen::Index>(t) * space.dofs_per_triangle();

  Jet jet;
  const std::vector<double> full = bernstein_all(d, b);
  const std::vector<double> first = bernstein_all(d - 1, b);
  std::vector<std::array<double, 3>> hess;
  basis_hessians(d, b, g, hess);
  for (std::size_t q = 0; q < multi.size(); ++q) {
    const double c = gamma[base + static_cast<Eigen::Index>(q)];
    jet.value += c * full[q];
    for (int k = 0; k < 3; ++k) {
      std::array<int, 3> e = multi[q];
      if (--e[k] < 0) continue;
      const double v = d * first[position(d - 1, e[0], e[1])];
      jet.dx += c * v * g[k][0];
      jet.dy += c * v * g[k][1];
    }
    jet.dxx += c * hess[q][0];
    jet.dxy += c * hess[q][1];
    jet.dyy += c * hess[q][2];
  }
  return jet;
}

Vector bezier_interpolant(const SplineSpace& space, const std::function<double(const Point2&)>& f) {
  const int d = space.degree(), dofs = space.dofs_per_triangle();
  const auto& multi = space.multi_indices();
  Matrix colloc(dofs, dofs);
  for (int p = 0; p < dofs; ++p) {
    const Barycentric b{double(multi[p][0]) / d, double(multi[p][1]) / d, double(multi[p][2]) / d};
    const std::vector<double> v = bernstein_all(d, b);
    for (int q = 0; q < dofs; ++q) colloc(p, q) = v[q];
  }
  const Eigen::PartialPivLU<Matrix> lu(colloc);
  Vector gamma(space.size());
  Vector rhs(dofs);
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    for (int p = 0; p < dofs; ++p) {
      const Barycentric b{double(multi[p][0]) / d, double(multi[p][1]) / d, double(multi[p][2]) / d};
      rhs[p] = f(space.mesh().to_cartesian(static_cast<int>(t), b));
    }
    gamma.segment(static_cast<Eigen::Index>(t) * dofs, dofs) = lu.solve(rhs);
  }
  return gamma;
}

}  // namespace plsm
