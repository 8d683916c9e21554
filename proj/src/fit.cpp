#include "plsm/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plsm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json vec_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      out.push_back(v[i]);
    } else {
      out.push_back(nullptr);
    }
  }
  return out;
}

nlohmann::json scalar_json(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

Vector json_vec(const nlohmann::json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j[i].is_null() ? kNaN : j[i].get<double>();
  }
  return v;
}

double json_scalar(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return kNaN;
  return j.at(key).get<double>();
}

nlohmann::json gcv_json(const std::vector<GcvRow>& table) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : table) {
    out.push_back({{"lambda", row.lambda}, {"rss", row.rss}, {"trace", row.trace}, {"gcv", scalar_json(row.gcv)}});
  }
  return out;
}

struct Refit {
  Vector beta;
  GcvRow row;
};

// Partially linear fit for fixed lambda with beta unpenalized: the smoother is profiled out,
// beta = (Z'(I-H)Z)^{-1} Z'(I-H)y and the total hat trace adds the parametric block.
Refit profiled_refit(const SpectralSmoother& sm, double lambda, const Vector& y, const Matrix& zq) {
  const Eigen::Index n = y.size();
  const Eigen::Index q = zq.cols();
  Matrix cols(n, q + 1);
  cols.col(0) = y;
  cols.rightCols(q) = zq;
  const Matrix smoothed = sm.apply_hat(lambda, cols);
  const Vector ry = y - smoothed.col(0);
  const Matrix rz = zq - smoothed.rightCols(q);
  Refit out;
  out.row.lambda = lambda;
  out.row.trace = sm.hat_trace(lambda);
  out.beta = Vector::Zero(q);
  if (q > 0) {
    Matrix m = zq.transpose() * rz;
    m = 0.5 * (m + m.transpose());
    Eigen::LDLT<Matrix> ldlt(m);
    const double scale = m.diagonal().cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !(scale > 0.0) ||
        ldlt.vectorD().cwiseAbs().minCoeff() <= 1e-12 * scale) {
      out.row.rss = kNaN;
      out.row.gcv = std::numeric_limits<double>::infinity();
      return out;
    }
    out.beta = ldlt.solve(zq.transpose() * ry);
    out.row.trace += ldlt.solve(rz.transpose() * rz).trace();
  }
  out.row.rss = (ry - rz * out.beta).squaredNorm();
  const double dof = static_cast<double>(n) - out.row.trace;
  out.row.gcv = dof > 1e-8 * static_cast<double>(n) ? static_cast<double>(n) * out.row.rss / (dof * dof)
                                                     : std::numeric_limits<double>::infinity();
  return out;
}

Matrix select_columns(const Matrix& z, const std::vector<int>& idx) {
  Matrix out(z.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = z.col(idx[k]);
  return out;
}

}  // namespace

void DesignData::check() const {
  if (z.rows() != y.size()) throw InputError("covariate matrix has " + std::to_string(z.rows()) + " rows, expected " +
                                             std::to_string(y.size()));
  if (static_cast<Eigen::Index>(x.size()) != y.size()) throw InputError("location count does not match the response");
  if (!names.empty() && static_cast<Eigen::Index>(names.size()) != z.cols()) {
    throw InputError("covariate name count does not match the covariate matrix");
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) throw InputError("response is not finite in row " + std::to_string(i));
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      if (!std::isfinite(z(i, j))) throw InputError("covariate is not finite in row " + std::to_string(i));
    }
    const auto& p = x[static_cast<std::size_t>(i)];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw InputError("location is not finite in row " + std::to_string(i));
  }
}

FitResult fit_plsm(const DesignData& data, std::shared_ptr<const PenalizedBasis> basis, const FitConfig& cfg) {
  data.check();
  const SplineSpace& space = basis->space();
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  if (n < 4) throw InputError("at least four observations are required");

  FitResult res;
  res.n = n;
  res.degree = space.degree();
  res.smoothness = space.smoothness();
  res.mesh_hash = space.mesh().hash();
  res.names = data.names;
  if (res.names.empty()) {
    for (Eigen::Index j = 0; j < p; ++j) res.names.push_back("z" + std::to_string(j + 1));
  }
  if (space.degree() < 3 * space.smoothness() + 2) {
    res.warnings.push_back("degree below 3r+2; the spline space may approximate poorly");
  }

  const SparseMatrix b = eval_basis_matrix(space, data.x);
  const SpectralSmoother sm(basis, b);

  // Step 0: common roughness parameter for the response and every covariate.
  const std::vector<double> grid0 =
      cfg.lambda0_grid.empty() ? default_lambda_grid(n, space.mesh().mesh_size()) : cfg.lambda0_grid;
  const GcvResult g0 = gcv_select(sm, data.y, grid0);
  res.lambda0 = g0.lambda;
  res.gcv0 = g0.table;

  // Step 1: SCAD selection on the spline-decorrelated data.
  std::vector<int> active;
  res.lambda2 = kNaN;
  if (cfg.oracle_support) {
    for (int j : *cfg.oracle_support) {
      if (j < 0 || j >= p) throw InputError("oracle support index out of range");
      active.push_back(j);
    }
    std::sort(active.begin(), active.end());
    active.erase(std::unique(active.begin(), active.end()), active.end());
  } else if (p > 0) {
    const Vector y_work = data.y - sm.apply_hat(res.lambda0, data.y);
    const Matrix z_work = data.z - smooth_columns(sm, data.z, res.lambda0);
    res.cd_scales = column_scales(z_work);
    std::vector<double> grid2 = cfg.lambda2_grid;
    if (grid2.empty()) grid2 = default_lambda2_grid(lambda_max(y_work, z_work), cfg.n_lambda2, cfg.lambda2_ratio);
    BicResult bic = bic_select(y_work, z_work, grid2, cfg.cd);
    res.lambda2 = bic.lambda;
    res.path = std::move(bic.path);
    res.path_index = bic.index;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (bic.beta[j] != 0.0) active.push_back(static_cast<int>(j));
    }
    for (const auto& row : res.path) {
      if (!row.converged) {
        res.warnings.push_back("coordinate descent reached max_iter at lambda2 = " + std::to_string(row.lambda));
      }
    }
  }
  res.active = active;

  // Step 2: unpenalized refit on the selected covariates, lambda1 by GCV on the profiled problem.
  const Matrix zq = select_columns(data.z, active);
  const std::vector<double> grid1 = cfg.lambda1_grid.empty() ? grid0 : cfg.lambda1_grid;
  std::vector<GcvRow> table1;
  std::vector<Vector> betas;
  for (double lambda : grid1) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InputError("lambda grid values must be positive");
    Refit rf = profiled_refit(sm, lambda, data.y, zq);
    table1.push_back(rf.row);
    betas.push_back(std::move(rf.beta));
  }
  const GcvResult g1 = pick_gcv(std::move(table1));
  res.lambda1 = g1.lambda;
  res.gcv1 = g1.table;
  const Vector& beta_q = betas[g1.index];
  res.beta = Vector::Zero(p);
  for (std::size_t k = 0; k < active.size(); ++k) res.beta[active[k]] = beta_q[static_cast<Eigen::Index>(k)];
  res.gamma = sm.solve_gamma(res.lambda1, data.y - zq * beta_q);
  res.trace_hat = sm.hat_trace(res.lambda1);
  res.fitted = predict_values(space, res, data.z, data.x);

  if (cfg.inference) {
    const Matrix zq_hat = smooth_columns(sm, zq, res.lambda1);
    Vector sigma_diag = Vector::Zero(zq.cols());
    if (std::isfinite(res.lambda2) && zq.cols() > 0) {
      Vector scales(zq.cols());
      for (std::size_t k = 0; k < active.size(); ++k) scales[static_cast<Eigen::Index>(k)] = res.cd_scales[active[k]];
      sigma_diag = scad_sigma_diagonal(beta_q, scales, ScadPenalty(res.lambda2, cfg.scad_a));
    }
    res.trace_S = trace_S(zq, zq_hat, sigma_diag, res.trace_hat);
    res.sigma2_hat = sigma2_hat(data.y, res.fitted, res.trace_S);
    const CovarianceReport cov = sandwich_cov(zq, zq_hat, sigma_diag, res.sigma2_hat);
    res.cov = cov.cov_beta;
    res.se = cov.se;
  } else {
    res.trace_S = kNaN;
    res.sigma2_hat = kNaN;
  }
  return res;
}

Vector predict_surface(const SplineSpace& space, const FitResult& fit, std::span<const Point2> points) {
  if (fit.gamma.size() != space.size()) throw InputError("model coefficients do not match the spline space");
  return eval_spline(space, fit.gamma, points);
}

Vector predict_values(const SplineSpace& space, const FitResult& fit, const Matrix& z, std::span<const Point2> points) {
  const Eigen::Index p = fit.beta.size();
  if (z.cols() != p) throw InputError("covariate matrix has " + std::to_string(z.cols()) + " columns, model expects " +
                                      std::to_string(p));
  if (z.rows() != static_cast<Eigen::Index>(points.size())) throw InputError("covariate and location counts differ");
  const bool standardized = fit.z_scale.size() == p && p > 0;
  Vector out = predict_surface(space, fit, points);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (std::isnan(out[i])) continue;
    double lin = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double zij = standardized ? (z(i, j) - fit.z_center[j]) / fit.z_scale[j] : z(i, j);
      lin += zij * fit.beta[j];
    }
    out[i] += lin;
  }
  return out;
}

nlohmann::json FitResult::to_json() const {
  nlohmann::json j;
  j["model"] = {{"mesh_hash", mesh_hash}, {"degree", degree}, {"smoothness", smoothness}, {"n", n}};
  j["covariates"] = names;
  j["beta"] = vec_json(beta);
  std::vector<std::string> active_names;
  for (int k : active) active_names.push_back(names.at(static_cast<std::size_t>(k)));
  j["active"] = active;
  j["active_names"] = active_names;
  j["lambda0"] = scalar_json(lambda0);
  j["lambda1"] = scalar_json(lambda1);
  j["lambda2"] = scalar_json(lambda2);
  j["sigma2_hat"] = scalar_json(sigma2_hat);
  j["se"] = vec_json(se);
  nlohmann::json cov_rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < cov.rows(); ++r) cov_rows.push_back(vec_json(cov.row(r).transpose()));
  j["cov"] = cov_rows;
  j["trace_S"] = scalar_json(trace_S);
  j["trace_hat"] = scalar_json(trace_hat);
  if (z_scale.size() > 0) {
    j["standardization"] = {{"center", vec_json(z_center)}, {"scale", vec_json(z_scale)}};
    Vector original = beta;
    for (Eigen::Index k = 0; k < beta.size(); ++k) original[k] = beta[k] / z_scale[k];
    j["beta_original_scale"] = vec_json(original);
  }
  j["gamma"] = vec_json(gamma);
  j["fitted"] = vec_json(fitted);
  j["gcv_step0"] = gcv_json(gcv0);
  j["gcv_step2"] = gcv_json(gcv1);
  nlohmann::json path_json = nlohmann::json::array();
  for (const auto& row : path) {
    path_json.push_back({{"lambda2", row.lambda},
                         {"rss", row.rss},
                         {"df", row.df},
                         {"bic", scalar_json(row.bic)},
                         {"iterations", row.iterations},
                         {"converged", row.converged}});
  }
  j["convergence"] = {{"path", path_json}, {"selected_index", path_index}, {"cd_scales", vec_json(cd_scales)}};
  j["warnings"] = warnings;
  return j;
}

FitResult FitResult::from_json(const nlohmann::json& j) {
  try {
    FitResult r;
    const auto& model = j.at("model");
    r.mesh_hash = model.at("mesh_hash").get<std::string>();
    r.degree = model.at("degree").get<int>();
    r.smoothness = model.at("smoothness").get<int>();
    r.n = model.at("n").get<Eigen::Index>();
    r.names = j.at("covariates").get<std::vector<std::string>>();
    r.beta = json_vec(j.at("beta"));
    r.active = j.at("active").get<std::vector<int>>();
    r.gamma = json_vec(j.at("gamma"));
    r.lambda0 = json_scalar(j, "lambda0");
    r.lambda1 = json_scalar(j, "lambda1");
    r.lambda2 = json_scalar(j, "lambda2");
    r.sigma2_hat = json_scalar(j, "sigma2_hat");
    r.trace_S = json_scalar(j, "trace_S");
    r.trace_hat = json_scalar(j, "trace_hat");
    r.se = json_vec(j.at("se"));
    if (j.contains("fitted")) r.fitted = json_vec(j.at("fitted"));
    if (j.contains("standardization")) {
      r.z_center = json_vec(j.at("standardization").at("center"));
      r.z_scale = json_vec(j.at("standardization").at("scale"));
    }
    const auto& cov = j.at("cov");
    r.cov.resize(static_cast<Eigen::Index>(cov.size()), static_cast<Eigen::Index>(cov.size()));
    for (std::size_t a = 0; a < cov.size(); ++a) {
      r.cov.row(static_cast<Eigen::Index>(a)) = json_vec(cov[a]).transpose();
    }
    if (r.beta.size() != static_cast<Eigen::Index>(r.names.size())) throw InputError("model: beta/covariate mismatch");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace plsm
