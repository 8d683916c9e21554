#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "plsm/basis.hpp"
#include "plsm/select.hpp"

namespace plsm::testing {

inline double multinomial(int d, int i, int j, int k) {
  return std::tgamma(d + 1.0) / (std::tgamma(i + 1.0) * std::tgamma(j + 1.0) * std::tgamma(k + 1.0));
}

// Cartesian second derivatives of one Bézier piece via coefficient differences:
// D_u D_v s = d (d-1) sum_{|kappa| = d-2} (sum_{k,l} u_k v_l c_{kappa + e_k + e_l}) B_kappa.
inline std::array<double, 3> second_derivatives(const SplineSpace& space, const Vector& gamma, int t, const Barycentric& b) {
  const Triangulation& m = space.mesh();
  const Point2 p1 = m.vertex(t, 0), p2 = m.vertex(t, 1), p3 = m.vertex(t, 2);
  const double a2 = (p2.x - p1.x) * (p3.y - p1.y) - (p2.y - p1.y) * (p3.x - p1.x);
  const double gx[3] = {(p2.y - p3.y) / a2, (p3.y - p1.y) / a2, (p1.y - p2.y) / a2};
  const double gy[3] = {(p3.x - p2.x) / a2, (p1.x - p3.x) / a2, (p2.x - p1.x) / a2};
  const int d = space.degree();
  auto c = [&](int i, int j, int k) { return gamma[space.index(t, i, j, k)]; };
  auto dd = [&](const double* u, const double* v) {
    double total = 0.0;
    for (int i = 0; i <= d - 2; ++i) {
      for (int j = 0; j <= d - 2 - i; ++j) {
        const int k = d - 2 - i - j;
        double diff = 0.0;
        for (int p = 0; p < 3; ++p) {
          for (int q = 0; q < 3; ++q) {
            int e[3] = {i, j, k};
            ++e[p];
            ++e[q];
            diff += u[p] * v[q] * c(e[0], e[1], e[2]);
          }
        }
        total += diff * multinomial(d - 2, i, j, k) * std::pow(b.b1, i) * std::pow(b.b2, j) * std::pow(b.b3, k);
      }
    }
    return d * (d - 1) * total;
  };
  return {dd(gx, gx), dd(gx, gy), dd(gy, gy)};
}

/// Thin-plate energy by exact quadrature of coefficient-difference second derivatives.
inline double energy_oracle(const SplineSpace& space, const Vector& gamma) {
  const TriangleRule rule = triangle_rule(11);  // exact through total degree 20
  double total = 0.0;
  for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto h = second_derivatives(space, gamma, static_cast<int>(t), rule.points[q]);
      total += rule.weights[q] * space.mesh().area(static_cast<int>(t)) * (h[0] * h[0] + 2 * h[1] * h[1] + h[2] * h[2]);
    }
  }
  return total;
}

/// Largest block eigenvalue magnitude of the penalty (its spectral norm).
inline double penalty_norm(const PenaltyMatrix& p) {
  double best = 0.0;
  for (const Matrix& blk : p.blocks) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(blk);
    best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return best;
}

/// argmin over beta in [-5 lambda, 5 lambda] of 0.5 (z - beta)^2 + p(|beta|) on a grid of step 1e-6 lambda,
/// widened to include z itself when |z| lies beyond the grid.
inline double scad_threshold_grid(double z, const ScadPenalty& pen) {
  const double l = pen.lambda;
  auto f = [&](double b) { return 0.5 * (z - b) * (z - b) + scad_value(std::abs(b), pen); };
  const long steps = 10'000'000;
  double best = 0.0;
  double best_f = f(0.0);
  for (long k = -steps / 2; k <= steps / 2; ++k) {
    const double b = static_cast<double>(k) * 1e-6 * l;
    const double v = f(b);
    if (v < best_f) {
      best_f = v;
      best = b;
    }
  }
  if (f(z) < best_f) best = z;
  return best;
}

/// Global minimum of 0.5 |y - Z beta|^2 + n sum p(s_j |beta_j|) for p <= 4 by enumerating, per coordinate, the
/// five kink values {0, +-lambda, +-a lambda} and the six open pieces of the SCAD penalty, and solving the
/// stationarity equations of every combination. Works in scaled coordinates b_j = s_j beta_j.
struct BruteForceResult {
  double objective = std::numeric_limits<double>::infinity();
  Vector beta;
};

inline BruteForceResult scad_brute_force(const Vector& y, const Matrix& z, const ScadPenalty& pen) {
  const Eigen::Index n = z.rows();
  const Eigen::Index p = z.cols();
  const double nd = static_cast<double>(n);
  const double l = pen.lambda;
  const double a = pen.a;
  const Vector s = column_scales(z);
  Matrix x = z;
  for (Eigen::Index j = 0; j < p; ++j) x.col(j) /= s[j];
  const Matrix xtx = x.transpose() * x;
  const Vector xty = x.transpose() * y;

  // option k < 5: fixed value; k >= 5: free piece (sign, kind) with kind 0 linear, 1 concave, 2 flat.
  const std::array<double, 5> fixed = {0.0, l, -l, a * l, -a * l};
  auto objective = [&](const Vector& b) {
    double pen_sum = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) pen_sum += scad_value(std::abs(b[j]), pen);
    return 0.5 * (y - x * b).squaredNorm() + nd * pen_sum;
  };

  BruteForceResult best;
  long combos = 1;
  for (Eigen::Index j = 0; j < p; ++j) combos *= 11;
  for (long code = 0; code < combos; ++code) {
    std::vector<int> opt(static_cast<std::size_t>(p));
    long c = code;
    for (Eigen::Index j = 0; j < p; ++j) {
      opt[static_cast<std::size_t>(j)] = static_cast<int>(c % 11);
      c /= 11;
    }
    Vector b = Vector::Zero(p);
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < p; ++j) {
      const int o = opt[static_cast<std::size_t>(j)];
      if (o < 5) {
        b[j] = fixed[static_cast<std::size_t>(o)];
      } else {
        free.push_back(j);
      }
    }
    if (!free.empty()) {
      const auto f = static_cast<Eigen::Index>(free.size());
      Matrix lhs(f, f);
      Vector rhs(f);
      for (Eigen::Index u = 0; u < f; ++u) {
        const Eigen::Index j = free[static_cast<std::size_t>(u)];
        const int o = opt[static_cast<std::size_t>(j)] - 5;
        const double sign = o % 2 == 0 ? 1.0 : -1.0;
        const int kind = o / 2;
        double fixed_part = 0.0;
        for (Eigen::Index k = 0; k < p; ++k) {
          if (opt[static_cast<std::size_t>(k)] < 5) fixed_part += xtx(j, k) * b[k];
        }
        rhs[u] = xty[j] - fixed_part;
        for (Eigen::Index v = 0; v < f; ++v) lhs(u, v) = xtx(j, free[static_cast<std::size_t>(v)]);
        if (kind == 0) {
          rhs[u] -= nd * l * sign;
        } else if (kind == 1) {
          lhs(u, u) -= nd / (a - 1.0);
          rhs[u] -= nd * a * l * sign / (a - 1.0);
        }
      }
      Eigen::FullPivLU<Matrix> lu(lhs);
      if (!lu.isInvertible()) continue;
      const Vector sol = lu.solve(rhs);
      bool feasible = true;
      for (Eigen::Index u = 0; u < f && feasible; ++u) {
        const Eigen::Index j = free[static_cast<std::size_t>(u)];
        const int o = opt[static_cast<std::size_t>(j)] - 5;
        const double sign = o % 2 == 0 ? 1.0 : -1.0;
        const int kind = o / 2;
        const double mag = sign * sol[u];
        const double lo = kind == 0 ? 0.0 : (kind == 1 ? l : a * l);
        const double hi = kind == 0 ? l : (kind == 1 ? a * l : std::numeric_limits<double>::infinity());
        feasible = mag >= lo && mag <= hi;
        b[j] = sol[u];
      }
      if (!feasible) continue;
    }
    const double v = objective(b);
    if (v < best.objective) {
      best.objective = v;
      best.beta = b.cwiseQuotient(s);
    }
  }
  return best;
}

}  // namespace plsm::testing
