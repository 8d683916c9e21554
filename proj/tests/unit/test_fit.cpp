#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "plsm/fit.hpp"
#include "plsm/sim.hpp"
#include "test_util.hpp"

using namespace plsm;
using plsm::testing::bundled;
using plsm::testing::make_basis;
using plsm::testing::random_points;
using plsm::testing::square_mesh;

namespace {

double quintic(const Point2& p) {
  return 0.5 + p.x - 2 * p.y + p.x * p.y - 0.7 * std::pow(p.x, 3) + 0.4 * p.x * p.x * std::pow(p.y, 3) +
         0.2 * std::pow(p.y, 5);
}

DesignData synthetic(const std::shared_ptr<const PenalizedBasis>& basis, Eigen::Index n, const Vector& beta,
                     double sigma, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  DesignData d;
  d.x = random_points(basis->space().mesh(), static_cast<std::size_t>(n), seed + 1);
  d.z.resize(n, beta.size());
  for (auto& v : d.z.reshaped()) v = nd(gen);
  d.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) d.y[i] = d.z.row(i).dot(beta) + quintic(d.x[static_cast<std::size_t>(i)]) + sigma * nd(gen);
  return d;
}

}  // namespace

TEST(Fit, NoCovariatesReducesToTheSmoother) {
  const auto basis = make_basis(square_mesh(3), 5, 1);
  DesignData d = synthetic(basis, 200, Vector(0), 0.1, 1);
  const FitResult fit = fit_plsm(d, basis);
  EXPECT_TRUE(fit.active.empty());
  EXPECT_EQ(fit.beta.size(), 0);
  EXPECT_TRUE(std::isnan(fit.lambda2));
  EXPECT_EQ(fit.lambda1, fit.lambda0);
  const SpectralSmoother sm(basis, eval_basis_matrix(basis->space(), d.x));
  const SmootherFit direct = sm.solve(fit.lambda0, d.y);
  EXPECT_LE((fit.fitted - direct.fitted).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(fit.trace_S, direct.trace_hat, 1e-12);
}

TEST(Fit, NoiselessPolynomialDataIsRecoveredExactly) {
  const auto basis = make_basis(square_mesh(2), 5, 1);
  const Vector beta = (Vector(3) << 1.0, 0.0, -0.5).finished();
  const DesignData d = synthetic(basis, 400, beta, 0.0, 2);
  FitConfig cfg;
  cfg.lambda0_grid = {1e-10, 1e-6, 1e-2, 1.0};
  const FitResult fit = fit_plsm(d, basis, cfg);
  EXPECT_LE((fit.beta - beta).cwiseAbs().maxCoeff(), 1e-3);
  const auto grid = random_points(basis->space().mesh(), 500, 3);
  Vector truth(500);
  for (std::size_t i = 0; i < 500; ++i) truth[static_cast<Eigen::Index>(i)] = quintic(grid[i]);
  const Vector est = predict_surface(basis->space(), fit, grid);
  const Vector diff = (est.array() - est.mean()) - (truth.array() - truth.mean());
  EXPECT_LE(diff.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Fit, RefitSatisfiesTheBlockedNormalEquations) {
  const auto basis = make_basis(square_mesh(3), 5, 1);
  const Vector beta = (Vector(4) << 1.0, -1.0, 0.0, 0.0).finished();
  const DesignData d = synthetic(basis, 300, beta, 0.3, 4);
  const FitResult fit = fit_plsm(d, basis);
  ASSERT_FALSE(fit.active.empty());
  Matrix zq(300, static_cast<Eigen::Index>(fit.active.size()));
  Vector bq(zq.cols());
  for (std::size_t k = 0; k < fit.active.size(); ++k) {
    zq.col(static_cast<Eigen::Index>(k)) = d.z.col(fit.active[k]);
    bq[static_cast<Eigen::Index>(k)] = fit.beta[fit.active[k]];
  }
  const SparseMatrix b = eval_basis_matrix(basis->space(), d.x);
  const Vector resid = d.y - zq * bq - b * fit.gamma;
  // Parametric block: Z'(y - Z beta - B gamma) = 0.
  EXPECT_LE((zq.transpose() * resid).cwiseAbs().maxCoeff(), 1e-6 * (zq.transpose() * d.y).cwiseAbs().maxCoeff());
  // Spline block: gamma is the penalized smooth of the partial residual.
  const PenalizedSystem sys(basis, b, fit.lambda1);
  const SmootherFit partial = sys.solve_theta(d.y - zq * bq);
  EXPECT_LE((partial.gamma - fit.gamma).cwiseAbs().maxCoeff(), 1e-6 * fit.gamma.cwiseAbs().maxCoeff());
}

TEST(Fit, InactiveCoefficientsAreExactlyZero) {
  const auto basis = make_basis(square_mesh(3), 5, 1);
  const Vector beta = (Vector(6) << 1.0, 0.0, 0.0, -0.8, 0.0, 0.0).finished();
  const FitResult fit = fit_plsm(synthetic(basis, 250, beta, 0.3, 5), basis);
  std::vector<int> expected = {0, 3};
  EXPECT_EQ(fit.active, expected);
  for (Eigen::Index j = 0; j < 6; ++j) {
    if (std::find(fit.active.begin(), fit.active.end(), j) == fit.active.end()) EXPECT_EQ(fit.beta[j], 0.0);
  }
  EXPECT_EQ(fit.se.size(), 2);
  EXPECT_EQ(fit.path.size(), 50u);
  EXPECT_EQ(fit.path[fit.path_index].lambda, fit.lambda2);
}

TEST(Fit, HorseshoeExampleSelectsTheTrueSupport) {
  SimConfig cfg;
  const auto basis = make_basis(bundled("tri2"), 5, 1);
  const auto pool = horseshoe_grid(basis->space().mesh());
  const SimDataset ds = generate_dataset(cfg, 0, pool);
  const FitResult fit = fit_plsm(ds.data, basis);
  EXPECT_EQ(fit.active, (std::vector<int>{0, 1}));
  EXPECT_NEAR(fit.beta[0], 1.0, 0.2);
  EXPECT_NEAR(fit.beta[1], -1.0, 0.2);
}

TEST(Fit, OracleSupportSkipsSelection) {
  const auto basis = make_basis(square_mesh(3), 5, 1);
  const Vector beta = (Vector(3) << 1.0, 0.0, 0.5).finished();
  FitConfig cfg;
  cfg.oracle_support = std::vector<int>{2, 0, 2};
  const FitResult fit = fit_plsm(synthetic(basis, 200, beta, 0.2, 6), basis, cfg);
  EXPECT_EQ(fit.active, (std::vector<int>{0, 2}));
  EXPECT_TRUE(std::isnan(fit.lambda2));
  EXPECT_TRUE(fit.path.empty());
  EXPECT_EQ(fit.beta[1], 0.0);
  cfg.oracle_support = std::vector<int>{5};
  EXPECT_THROW(fit_plsm(synthetic(basis, 200, beta, 0.2, 6), basis, cfg), InputError);
}

TEST(Fit, IsDeterministic) {
  const auto basis = make_basis(square_mesh(3), 5, 1);
  const Vector beta = (Vector(4) << 1.0, 0.0, -0.5, 0.0).finished();
  const DesignData d = synthetic(basis, 200, beta, 0.3, 7);
  EXPECT_EQ(fit_plsm(d, basis).to_json().dump(), fit_plsm(d, basis).to_json().dump());
}

TEST(Fit, JsonRoundTripPredictsBitIdentically) {
  const auto basis = make_basis(square_mesh(3), 5, 1);
  const Vector beta = (Vector(3) << 1.0, 0.0, -0.5).finished();
  const DesignData d = synthetic(basis, 200, beta, 0.3, 8);
  FitResult fit = fit_plsm(d, basis);
  fit.z_center = Vector::Zero(3);
  fit.z_scale = Vector::Ones(3);
  const FitResult back = FitResult::from_json(nlohmann::json::parse(fit.to_json().dump()));
  EXPECT_EQ(back.mesh_hash, fit.mesh_hash);
  EXPECT_EQ(back.active, fit.active);
  EXPECT_TRUE(back.gamma == fit.gamma);
  EXPECT_TRUE(back.beta == fit.beta);
  EXPECT_TRUE(back.cov == fit.cov);
  EXPECT_TRUE(std::isnan(back.lambda2) == std::isnan(fit.lambda2));
  const Vector again = predict_values(basis->space(), back, d.z, d.x);
  EXPECT_TRUE(again == fit.fitted);
  EXPECT_THROW(FitResult::from_json(nlohmann::json::parse(R"({"model": {}})")), InputError);
}

TEST(Fit, PredictionIsMissingOffTheDomain) {
  const auto basis = make_basis(square_mesh(2), 5, 1);
  const FitResult fit = fit_plsm(synthetic(basis, 100, Vector::Ones(1), 0.1, 9), basis);
  const std::vector<Point2> pts = {{0.5, 0.5}, {2.0, 0.5}};
  const Vector v = predict_values(basis->space(), fit, Matrix::Ones(2, 1), pts);
  EXPECT_TRUE(std::isfinite(v[0]));
  EXPECT_TRUE(std::isnan(v[1]));
  EXPECT_THROW(predict_values(basis->space(), fit, Matrix::Ones(2, 2), pts), InputError);
}

TEST(Fit, StandardizationIsAppliedAtPrediction) {
  const auto basis = make_basis(square_mesh(2), 5, 1);
  const FitResult fit = fit_plsm(synthetic(basis, 100, Vector::Ones(1), 0.1, 10), basis);
  FitResult scaled = fit;
  scaled.z_center = Vector::Constant(1, 1.0);
  scaled.z_scale = Vector::Constant(1, 2.0);
  const std::vector<Point2> pts = {{0.3, 0.6}};
  const Matrix z = Matrix::Constant(1, 1, 5.0);
  const double base = predict_surface(basis->space(), fit, pts)[0];
  EXPECT_NEAR(predict_values(basis->space(), scaled, z, pts)[0], base + fit.beta[0] * 2.0, 1e-14);
}

TEST(Fit, RejectsBadInput) {
  const auto basis = make_basis(square_mesh(2), 5, 1);
  DesignData d = synthetic(basis, 50, Vector::Ones(2), 0.1, 11);
  DesignData off = d;
  off.x[7] = {5.0, 5.0};
  try {
    fit_plsm(off, basis);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("7"), std::string::npos);
  }
  DesignData nan = d;
  nan.y[3] = std::nan("");
  EXPECT_THROW(fit_plsm(nan, basis), InputError);
  DesignData ragged = d;
  ragged.z.conservativeResize(40, 2);
  EXPECT_THROW(fit_plsm(ragged, basis), InputError);
  DesignData tiny = synthetic(basis, 3, Vector::Ones(1), 0.1, 12);
  EXPECT_THROW(fit_plsm(tiny, basis), InputError);
  d.names = {"only-one"};
  EXPECT_THROW(fit_plsm(d, basis), InputError);
}
