#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "plsm/inference.hpp"
#include "plsm/select.hpp"
#include "plsm/smoother.hpp"

namespace plsm {

struct DesignData {
  Vector y;
  Matrix z;                      ///< n x p, p may be 0
  std::vector<Point2> x;
  std::vector<std::string> names;  ///< covariate names; defaults to z1..zp

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return z.cols(); }
  void check() const;
};

struct FitConfig {
  std::vector<double> lambda0_grid;  ///< empty: default_lambda_grid
  std::vector<double> lambda1_grid;  ///< empty: same as the lambda0 grid
  std::vector<double> lambda2_grid;  ///< empty: default_lambda2_grid from lambda_max
  int n_lambda2 = 50;
  double lambda2_ratio = 1e-3;
  double scad_a = kScadA;
  CoordinateDescentConfig cd;
  /// Skip selection and refit on these (0-based) columns.
  std::optional<std::vector<int>> oracle_support;
  bool inference = true;
};

struct FitResult {
  Vector beta;                 ///< p-vector, exact zeros off the active set
  std::vector<int> active;     ///< 0-based indices of selected covariates
  Vector gamma;                ///< Bernstein coefficients of alpha-hat
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;        ///< NaN when selection was skipped
  double sigma2_hat = 0.0;
  Vector se;                   ///< active coefficients
  Matrix cov;                  ///< active coefficients
  double trace_S = 0.0;
  double trace_hat = 0.0;      ///< tr H_B(lambda1)
  Vector fitted;
  std::vector<GcvRow> gcv0;
  std::vector<GcvRow> gcv1;
  std::vector<BicRow> path;
  std::size_t path_index = 0;
  Vector cd_scales;            ///< column scales used inside coordinate descent
  std::vector<std::string> names;
  std::string mesh_hash;
  int degree = 0;
  int smoothness = 0;
  Eigen::Index n = 0;
  Vector z_center;             ///< optional covariate standardization (empty if none)
  Vector z_scale;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
  static FitResult from_json(const nlohmann::json& j);
};

FitResult fit_plsm(const DesignData& data, std::shared_ptr<const PenalizedBasis> basis, const FitConfig& cfg = {});

/// z' beta + alpha(x) per row; NaN where x lies outside the mesh. Applies the stored standardization.
Vector predict_values(const SplineSpace& space, const FitResult& fit, const Matrix& z, std::span<const Point2> points);

/// Alpha-hat alone; NaN off the domain.
Vector predict_surface(const SplineSpace& space, const FitResult& fit, std::span<const Point2> points);

}  // namespace plsm
