#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <tuple>

#include "plsm/basis.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace plsm;
using plsm::testing::bundled;
using plsm::testing::energy_oracle;
using plsm::testing::penalty_norm;
using plsm::testing::random_points;
using plsm::testing::square_mesh;
using plsm::testing::two_triangles;

TEST(Basis, IndexingAndSize) {
  const SplineSpace s(two_triangles(), 5, 1);
  EXPECT_EQ(s.dofs_per_triangle(), 21);
  EXPECT_EQ(s.size(), 42);
  EXPECT_EQ(s.local_index(5, 0, 0), 0);
  EXPECT_EQ(s.local_index(4, 1, 0), 1);
  EXPECT_EQ(s.local_index(4, 0, 1), 2);
  EXPECT_EQ(s.local_index(0, 0, 5), 20);
  int pos = 0;
  for (const auto& mi : s.multi_indices()) {
    EXPECT_EQ(mi[0] + mi[1] + mi[2], 5);
    EXPECT_EQ(s.local_index(mi[0], mi[1], mi[2]), pos++);
  }
  EXPECT_THROW(SplineSpace(two_triangles(), 3, 3), InputError);
}

TEST(Basis, CornerAndCentroidValues) {
  const auto mesh = two_triangles();
  const SplineSpace s(mesh, 2, 0);
  const std::vector<Point2> pts = {mesh->vertex(0, 0)};
  const SparseMatrix b = eval_basis_matrix(s, pts);
  const Matrix dense(b);
  EXPECT_DOUBLE_EQ(dense(0, s.index(0, 2, 0, 0)), 1.0);
  EXPECT_DOUBLE_EQ(dense.row(0).cwiseAbs().sum(), 1.0);

  const auto vals = bernstein_all(2, Barycentric{1.0 / 3, 1.0 / 3, 1.0 / 3});
  EXPECT_NEAR(vals[static_cast<std::size_t>(s.local_index(1, 1, 0))], 2.0 / 9.0, 1e-15);
}

TEST(Basis, PartitionOfUnityAndSparsity) {
  const auto mesh = bundled("tri2");
  const SplineSpace s(mesh, 5, 1);
  const auto pts = random_points(*mesh, 500, 3);
  const SparseMatrix b = eval_basis_matrix(s, pts);
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    double sum = 0.0;
    int nnz = 0;
    for (SparseMatrix::InnerIterator it(b, i); it; ++it) {
      sum += it.value();
      ++nnz;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_LE(nnz, s.dofs_per_triangle());
  }
}

TEST(Basis, UnlocatablePointNamesTheRow) {
  const SplineSpace s(two_triangles(), 2, 0);
  const std::vector<Point2> pts = {{0.5, 0.25}, {3.0, 3.0}};
  try {
    eval_basis_matrix(s, pts);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
}

TEST(Basis, SmoothnessRowCounts) {
  const Triangulation single({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
  const SplineSpace one(std::make_shared<const Triangulation>(single), 5, 1);
  EXPECT_EQ(smoothness_matrix(one).rows(), 0);

  const SplineSpace lin(two_triangles(), 1, 0);
  const SparseMatrix h1 = smoothness_matrix(lin);
  ASSERT_EQ(h1.rows(), 2);
  // Each C0 row equates one shared-vertex coefficient across the two triangles.
  for (Eigen::Index r = 0; r < h1.rows(); ++r) {
    std::vector<double> vals;
    for (SparseMatrix::InnerIterator it(h1, r); it; ++it) vals.push_back(it.value());
    ASSERT_EQ(vals.size(), 2u);
    EXPECT_DOUBLE_EQ(vals[0] + vals[1], 0.0);
  }

  const SplineSpace quint(two_triangles(), 5, 1);
  const SparseMatrix h5 = smoothness_matrix(quint);
  EXPECT_EQ(h5.rows(), 11);
  const NullSpaceBasis ns = null_space_basis(h5, quint.size());
  EXPECT_EQ(ns.rank, 11);
  EXPECT_EQ(ns.q2.cols(), 31);
}

TEST(Basis, EveryConstraintRowTouchesTwoTriangles) {
  const SplineSpace s(bundled("tri1"), 5, 1);
  const SparseMatrix h = smoothness_matrix(s);
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    std::set<Eigen::Index> tris;
    for (SparseMatrix::InnerIterator it(h, r); it; ++it) tris.insert(it.col() / s.dofs_per_triangle());
    EXPECT_EQ(tris.size(), 2u);
  }
}

TEST(Basis, NullSpaceSmallCases) {
  const SparseMatrix empty(0, 3);
  const NullSpaceBasis id = null_space_basis(empty, 3);
  EXPECT_TRUE(id.q2.isApprox(Matrix::Identity(3, 3)));

  SparseMatrix h(1, 2);
  h.insert(0, 0) = 1.0;
  h.insert(0, 1) = -1.0;
  const NullSpaceBasis ns = null_space_basis(h, 2);
  ASSERT_EQ(ns.q2.cols(), 1);
  EXPECT_NEAR(std::abs(ns.q2(0, 0)), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(ns.q2(0, 0), ns.q2(1, 0), 1e-14);
}

TEST(Basis, NullSpaceIsOrthonormalAndAnnihilated) {
  const SplineSpace s(bundled("tri1"), 5, 1);
  const SparseMatrix h = smoothness_matrix(s);
  const NullSpaceBasis ns = null_space_basis(h, s.size());
  EXPECT_LE((h * ns.q2).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((ns.q2.transpose() * ns.q2 - Matrix::Identity(ns.q2.cols(), ns.q2.cols())).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Basis, SmoothnessCertificateAcrossEdges) {
  for (const auto& [mesh, d, r] : {std::tuple{two_triangles(), 5, 1}, std::tuple{bundled("tri1"), 5, 1},
                                   std::tuple{square_mesh(3), 4, 1}, std::tuple{square_mesh(2), 3, 0}}) {
    const SplineSpace s(mesh, d, r);
    const NullSpaceBasis ns = null_space_basis(smoothness_matrix(s), s.size());
    std::mt19937_64 gen(17);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 50; ++rep) {
      Vector theta(ns.q2.cols());
      for (auto& v : theta) v = nd(gen);
      const Vector gamma = ns.q2 * theta;
      const double scale = 1.0 + gamma.cwiseAbs().maxCoeff();
      for (const Edge& e : mesh->edges()) {
        if (!e.interior()) continue;
        const Point2 a = mesh->vertices()[e.a], b = mesh->vertices()[e.b];
        for (int k = 1; k <= 20; ++k) {
          const double t = k / 21.0;
          const Point2 p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
          const Jet j1 = eval_jet(s, gamma, e.triangles[0], p);
          const Jet j2 = eval_jet(s, gamma, e.triangles[1], p);
          ASSERT_NEAR(j1.value, j2.value, 1e-8 * scale);
          if (r >= 1) {
            const double h = mesh->mesh_size();
            ASSERT_NEAR(j1.dx, j2.dx, 1e-8 * scale / h * d);
            ASSERT_NEAR(j1.dy, j2.dy, 1e-8 * scale / h * d);
          }
        }
      }
    }
  }
}

TEST(Basis, C1IsNotC2) {
  // A generic element of the C1 space has a second-derivative jump somewhere.
  const auto mesh = square_mesh(2);
  const SplineSpace s(mesh, 5, 1);
  const NullSpaceBasis ns = null_space_basis(smoothness_matrix(s), s.size());
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  Vector theta(ns.q2.cols());
  for (auto& v : theta) v = nd(gen);
  const Vector gamma = ns.q2 * theta;
  double jump = 0.0;
  for (const Edge& e : mesh->edges()) {
    if (!e.interior()) continue;
    const Point2 a = mesh->vertices()[e.a], b = mesh->vertices()[e.b];
    const Point2 p{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
    const Jet j1 = eval_jet(s, gamma, e.triangles[0], p);
    const Jet j2 = eval_jet(s, gamma, e.triangles[1], p);
    jump = std::max({jump, std::abs(j1.dxx - j2.dxx), std::abs(j1.dyy - j2.dyy)});
  }
  EXPECT_GT(jump, 1e-3);
}

TEST(Basis, PolynomialReproduction) {
  const auto mesh = bundled("tri1");
  const SplineSpace s(mesh, 5, 1);
  auto q = [](const Point2& p) {
    return 1 + 2 * p.x - p.y + 0.5 * p.x * p.x - p.x * p.y + 0.3 * std::pow(p.y, 3) + 0.1 * std::pow(p.x, 5) -
           0.2 * p.x * p.x * std::pow(p.y, 3);
  };
  const Vector gamma = bezier_interpolant(s, q);
  const SparseMatrix h = smoothness_matrix(s);
  EXPECT_LE((h * gamma).cwiseAbs().maxCoeff(), 1e-9 * gamma.cwiseAbs().maxCoeff());
  const auto pts = random_points(*mesh, 100, 9);
  const Vector vals = eval_spline(s, gamma, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(vals[static_cast<Eigen::Index>(i)], q(pts[i]), 1e-9);
}

TEST(Basis, EvalSplineBasics) {
  const auto mesh = bundled("tri1");
  const SplineSpace s(mesh, 3, 1);
  const auto pts = random_points(*mesh, 10, 21);
  const Vector ones = eval_spline(s, Vector::Ones(s.size()), pts);
  const Vector zeros = eval_spline(s, Vector::Zero(s.size()), pts);
  for (Eigen::Index i = 0; i < ones.size(); ++i) {
    EXPECT_NEAR(ones[i], 1.0, 1e-12);
    EXPECT_EQ(zeros[i], 0.0);
  }
  // s = x on one triangle: Bézier coefficients are the x-coordinates of the domain points.
  Vector gamma = Vector::Zero(s.size());
  const int t = 4;
  for (const auto& mi : s.multi_indices()) {
    double x = 0.0;
    for (int k = 0; k < 3; ++k) x += mi[static_cast<std::size_t>(k)] * mesh->vertex(t, k).x / s.degree();
    gamma[s.index(t, mi[0], mi[1], mi[2])] = x;
  }
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    double b1 = u(gen), b2 = u(gen);
    if (b1 + b2 > 1) {
      b1 = 1 - b1;
      b2 = 1 - b2;
    }
    const Point2 p = mesh->to_cartesian(t, {b1, b2, 1 - b1 - b2});
    const Jet j = eval_jet(s, gamma, t, p);
    EXPECT_NEAR(j.value, p.x, 1e-12);
    EXPECT_NEAR(j.dx, 1.0, 1e-10);
    EXPECT_NEAR(j.dy, 0.0, 1e-10);
  }
  const std::vector<Point2> outside = {{100.0, 100.0}};
  EXPECT_TRUE(std::isnan(eval_spline(s, gamma, outside)[0]));
}

TEST(Basis, EvalSplineMatchesBasisMatrix) {
  const auto mesh = bundled("tri2");
  const SplineSpace s(mesh, 5, 1);
  std::mt19937_64 gen(8);
  std::normal_distribution<double> nd;
  Vector gamma(s.size());
  for (auto& v : gamma) v = nd(gen);
  const auto pts = random_points(*mesh, 200, 12);
  const Vector a = eval_spline(s, gamma, pts);
  const Vector b = eval_basis_matrix(s, pts) * gamma;
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12 * gamma.cwiseAbs().maxCoeff());
}

TEST(Basis, TriangleRuleIsExactForMonomials) {
  for (int n : {2, 5, 11}) {
    const TriangleRule rule = triangle_rule(n);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-14);
    for (int i = 0; i <= 2 * n - 2; ++i) {
      for (int j = 0; i + j <= 2 * n - 2; ++j) {
        double approx = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
          approx += rule.weights[q] * std::pow(rule.points[q].b2, i) * std::pow(rule.points[q].b3, j);
        }
        // mean of b2^i b3^j over the triangle = 2 i! j! / (i + j + 2)!
        const double exact = 2.0 * std::tgamma(i + 1.0) * std::tgamma(j + 1.0) / std::tgamma(i + j + 3.0);
        EXPECT_NEAR(approx, exact, 1e-14) << n << " " << i << " " << j;
      }
    }
  }
}

TEST(Basis, EnergyOfQuadraticsAndAffines) {
  const auto mesh = bundled("tri1");
  const SplineSpace s(mesh, 5, 1);
  const PenaltyMatrix p = energy_matrix(s);
  const double area = mesh->total_area();
  const Vector xx = bezier_interpolant(s, [](const Point2& q) { return q.x * q.x; });
  const Vector xy = bezier_interpolant(s, [](const Point2& q) { return q.x * q.y; });
  const Vector aff = bezier_interpolant(s, [](const Point2& q) { return 3.0 - 2.0 * q.x + 0.5 * q.y; });
  EXPECT_NEAR(p.quadratic(xx), 4.0 * area, 1e-9 * area);
  EXPECT_NEAR(p.quadratic(xy), 2.0 * area, 1e-9 * area);
  EXPECT_LE(std::abs(p.quadratic(aff)), 1e-10 * penalty_norm(p) * aff.squaredNorm());
  EXPECT_THROW(energy_matrix(SplineSpace(mesh, 1, 0)), InputError);
}

TEST(Basis, EnergyMatchesCoefficientDifferenceOracle) {
  for (const auto& [mesh, d] : {std::pair{bundled("tri1"), 5}, std::pair{square_mesh(2), 3}, std::pair{bundled("usa"), 2}}) {
    const SplineSpace s(mesh, d, 0);
    const PenaltyMatrix p = energy_matrix(s);
    std::mt19937_64 gen(31);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 20; ++rep) {
      Vector gamma(s.size());
      for (auto& v : gamma) v = nd(gen);
      const double oracle = energy_oracle(s, gamma);
      EXPECT_NEAR(p.quadratic(gamma), oracle, 1e-8 * oracle);
    }
  }
}

TEST(Basis, PenaltyIsSymmetricPsd) {
  const SplineSpace s(bundled("tri2"), 5, 1);
  const PenaltyMatrix p = energy_matrix(s);
  const double norm = penalty_norm(p);
  for (const Matrix& blk : p.blocks) {
    EXPECT_EQ((blk - blk.transpose()).cwiseAbs().maxCoeff(), 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(blk);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * norm);
  }
  const SparseMatrix sp = p.to_sparse();
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd;
  Vector g(s.size());
  for (auto& v : g) v = nd(gen);
  EXPECT_NEAR(g.dot(sp * g), p.quadratic(g), 1e-10 * std::abs(p.quadratic(g)));
  EXPECT_LE((p.apply(g) - sp * g).cwiseAbs().maxCoeff(), 1e-10 * (sp * g).cwiseAbs().maxCoeff());
}
