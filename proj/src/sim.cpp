#include "plsm/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

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

}  // namespace

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("PLSM_DATA_DIR"); env && *env) return env;
#ifdef PLSM_DATA_DIR
  return PLSM_DATA_DIR;
#else
  return "data";
#endif
}

const std::vector<std::string>& bundled_mesh_ids() {
  static const std::vector<std::string> ids = {"tri1", "tri2", "tri3", "lattice", "usa"};
  return ids;
}

Triangulation resolve_mesh(const std::string& id_or_path) {
  const auto& ids = bundled_mesh_ids();
  if (std::find(ids.begin(), ids.end(), id_or_path) != ids.end()) {
    return load_mesh((data_dir() / "meshes" / id_or_path).string());
  }
  namespace fs = std::filesystem;
  const bool looks_like_path = fs::exists(id_or_path) || id_or_path.find(',') != std::string::npos ||
                               fs::exists(id_or_path + "_vertices.csv");
  if (!looks_like_path) {
    throw InputError("unknown mesh '" + id_or_path + "' (bundled ids: tri1, tri2, tri3, lattice, usa)");
  }
  return load_mesh(id_or_path);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::for_replication(std::uint64_t base, std::uint64_t k) { return Rng(splitmix64(base + k)); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::below(std::size_t bound) {
  const auto k = static_cast<std::size_t>(uniform() * static_cast<double>(bound));
  return std::min(k, bound - 1);
}

std::pair<double, double> horseshoe_coordinates(const Point2& p) {
  const double r = kHorseshoeR;
  const double q = std::numbers::pi * r / 2.0;
  if (p.x >= 0.0 && p.y > 0.0) return {q + p.x, p.y - r};
  if (p.x >= 0.0) return {-q - p.x, -r - p.y};
  return {-r * std::atan(p.y / p.x), std::hypot(p.x, p.y) - r};
}

bool horseshoe_contains(const Point2& p, double tol) {
  const auto [a, d] = horseshoe_coordinates(p);
  (void)a;
  return std::abs(d) <= kHorseshoeR - kHorseshoeR0 + tol && p.x <= kHorseshoeL + tol;
}

double horseshoe_function(const Point2& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !horseshoe_contains(p, 1e-9)) {
    throw InputError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") is outside the horseshoe");
  }
  const auto [a, d] = horseshoe_coordinates(p);
  return a + d * d;
}

std::vector<Point2> horseshoe_grid(const Triangulation& mesh) {
  constexpr int nx = 180;
  constexpr int ny = 80;
  std::vector<Point2> out;
  for (int i = 0; i < nx; ++i) {
    const double x = -1.0 + 4.5 * i / (nx - 1);
    for (int j = 0; j < ny; ++j) {
      const Point2 p{x, -1.0 + 2.0 * j / (ny - 1)};
      if (horseshoe_contains(p) && mesh.locate(p)) out.push_back(p);
    }
  }
  return out;
}

std::vector<Point2> lattice_grid(const Triangulation& mesh, int k) {
  if (k < 2) throw InputError("lattice needs at least 2 points per side");
  std::vector<Point2> out;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const Point2 p{static_cast<double>(i) / (k - 1), static_cast<double>(j) / (k - 1)};
      if (mesh.locate(p)) out.push_back(p);
    }
  }
  return out;
}

Matrix generate_covariates(std::span<const Point2> x, double rho, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Matrix z(n, 8);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Point2& p = x[static_cast<std::size_t>(i)];
    if (p.y == 0.0) throw InputError("covariate generator needs X2 != 0 (row " + std::to_string(i) + ")");
    const double u = rng.uniform(-1.0, 1.0);
    const double t = std::numbers::pi * (rho * p.x / p.y + (1.0 - rho) * u);
    z(i, 0) = -(2.0 / 3.0) * std::atan(t);
    z(i, 2) = std::cos(t);
    for (int j : {1, 3, 4, 5, 6, 7}) z(i, j) = rng.uniform(-1.0, 1.0);
  }
  return z;
}

double gp_covariance(double h, double sigma_p, double phi) {
  return sigma_p * sigma_p * std::exp(-h * h / (2.0 * phi * phi));
}

Example parse_example(const std::string& name) {
  if (name == "horseshoe" || name == "1") return Example::Horseshoe;
  if (name == "correlated-noise" || name == "correlated" || name == "2") return Example::CorrelatedNoise;
  throw InputError("unknown example '" + name + "' (expected horseshoe or correlated-noise)");
}

std::string example_name(Example e) { return e == Example::Horseshoe ? "horseshoe" : "correlated-noise"; }

Vector SimConfig::beta() const {
  if (beta_true.size() > 0) return beta_true;
  Vector b = Vector::Zero(8);
  b[0] = 1.0;
  b[1] = -1.0;
  return b;
}

std::string SimConfig::mesh_id() const {
  if (!mesh.empty()) return mesh;
  return example == Example::Horseshoe ? "tri2" : "lattice";
}

void SimConfig::check() const {
  if (n < 1) throw InputError("n must be at least 1");
  if (!(sigma >= 0.0)) throw InputError("sigma must be nonnegative");
  if (!(rho >= 0.0 && rho < 1.0)) throw InputError("rho must lie in [0, 1)");
  if (replications < 1) throw InputError("replications must be at least 1");
  if (threads < 1) throw InputError("threads must be at least 1");
  if (beta().size() != 8) throw InputError("the simulation designs have 8 covariates; beta_true must have length 8");
  if (!(gp_sigma >= 0.0) || !(gp_range > 0.0)) throw InputError("invalid Gaussian-process parameters");
}

nlohmann::json SimConfig::to_json() const {
  nlohmann::json j = {{"example", example_name(example)},
                      {"n", n},
                      {"rho", rho},
                      {"sigma", sigma},
                      {"beta_true", vec_json(beta())},
                      {"mesh", mesh_id()},
                      {"degree", degree},
                      {"smoothness", smoothness},
                      {"replications", replications},
                      {"seed", seed},
                      {"oracle", oracle}};
  if (example == Example::CorrelatedNoise) {
    j["noise_process"] = {{"covariance", "squared-exponential"}, {"sigma_p", gp_sigma}, {"phi", gp_range}};
  }
  return j;
}

SimDataset generate_dataset(const SimConfig& cfg, int replication, std::span<const Point2> pool) {
  cfg.check();
  const auto n = static_cast<std::size_t>(cfg.n);
  if (n > pool.size()) {
    throw InputError("n = " + std::to_string(n) + " exceeds the " + std::to_string(pool.size()) + " available grid points");
  }
  Rng rng = Rng::for_replication(cfg.seed, static_cast<std::uint64_t>(replication));

  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i + rng.below(order.size() - i);
    std::swap(order[i], order[k]);
  }
  SimDataset ds;
  ds.data.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.data.x[i] = pool[order[i]];

  const Vector beta = cfg.beta();
  const auto nn = static_cast<Eigen::Index>(n);
  ds.alpha = Vector::Zero(nn);
  Vector eps(nn);
  if (cfg.example == Example::Horseshoe) {
    ds.data.z = generate_covariates(ds.data.x, cfg.rho, rng);
    for (Eigen::Index i = 0; i < nn; ++i) ds.alpha[i] = horseshoe_function(ds.data.x[static_cast<std::size_t>(i)]);
    for (Eigen::Index i = 0; i < nn; ++i) eps[i] = cfg.sigma * rng.normal();
  } else {
    ds.data.z.resize(nn, 8);
    for (Eigen::Index i = 0; i < nn; ++i) {
      for (Eigen::Index j = 0; j < 8; ++j) ds.data.z(i, j) = rng.normal();
    }
    Matrix cov(nn, nn);
    for (Eigen::Index i = 0; i < nn; ++i) {
      for (Eigen::Index j = 0; j < nn; ++j) {
        const Point2& a = ds.data.x[static_cast<std::size_t>(i)];
        const Point2& b = ds.data.x[static_cast<std::size_t>(j)];
        cov(i, j) = gp_covariance(std::hypot(a.x - b.x, a.y - b.y), cfg.gp_sigma, cfg.gp_range);
      }
    }
    // Symmetric square root tolerates the near-singular squared-exponential kernel.
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Vector xi(nn);
    for (Eigen::Index i = 0; i < nn; ++i) xi[i] = rng.normal();
    eps = es.eigenvectors() * (root.asDiagonal() * (es.eigenvectors().transpose() * xi));
  }
  ds.data.y = ds.data.z * beta + ds.alpha + eps;
  return ds;
}

double centered_rmse(const Vector& estimate, const Vector& truth) {
  if (estimate.size() != truth.size() || estimate.size() == 0) throw InputError("alpha vectors must match and be nonempty");
  const Vector e = (estimate.array() - estimate.mean()).matrix() - (truth.array() - truth.mean()).matrix();
  return std::sqrt(e.squaredNorm() / static_cast<double>(e.size()));
}

SimMetrics metrics(const std::vector<Vector>& beta_hats, const Vector& beta_true, const std::vector<double>& alpha_errors) {
  if (beta_hats.empty()) throw InputError("metrics need at least one replication");
  const Eigen::Index p = beta_true.size();
  SimMetrics m;
  m.replications = static_cast<int>(beta_hats.size());
  m.rmse_beta = Vector::Zero(p);
  Vector mean = Vector::Zero(p);
  double correct = 0.0;
  for (const Vector& b : beta_hats) {
    if (b.size() != p) throw InputError("estimate length does not match the true coefficients");
    bool exact = true;
    for (Eigen::Index j = 0; j < p; ++j) {
      const bool truth_zero = beta_true[j] == 0.0;
      const bool est_zero = b[j] == 0.0;
      if (!truth_zero && est_zero) m.F += 1.0;
      if (truth_zero && est_zero) m.T += 1.0;
      if (truth_zero != est_zero) exact = false;
      m.rmse_beta[j] += (b[j] - beta_true[j]) * (b[j] - beta_true[j]);
      mean[j] += b[j];
    }
    if (exact) correct += 1.0;
  }
  const double reps = static_cast<double>(beta_hats.size());
  m.F /= reps;
  m.T /= reps;
  m.C = 100.0 * correct / reps;
  m.rmse_beta = (m.rmse_beta / reps).cwiseSqrt();
  mean /= reps;
  m.sd_beta = Vector::Zero(p);
  if (beta_hats.size() > 1) {
    for (const Vector& b : beta_hats) m.sd_beta += (b - mean).cwiseAbs2();
    m.sd_beta = (m.sd_beta / (reps - 1.0)).cwiseSqrt();
  }
  m.rmse_alpha = 0.0;
  if (!alpha_errors.empty()) {
    for (double e : alpha_errors) m.rmse_alpha += e;
    m.rmse_alpha /= static_cast<double>(alpha_errors.size());
  }
  m.mean_se = Vector::Constant(p, kNaN);
  return m;
}

nlohmann::json SimMetrics::to_json() const {
  return {{"F", F},
          {"T", T},
          {"C", C},
          {"rmse_beta", vec_json(rmse_beta)},
          {"rmse_alpha", scalar_json(rmse_alpha)},
          {"mean_se", vec_json(mean_se)},
          {"sd_beta", vec_json(sd_beta)},
          {"replications", replications},
          {"failures", failures}};
}

nlohmann::json SimOutput::to_json(bool include_records) const {
  nlohmann::json j;
  j["config"] = config.to_json();
  j["metrics"] = metrics.to_json();
  if (include_records) {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records) {
      nlohmann::json o = {{"replication", r.index}, {"ok", r.ok}};
      if (r.ok) {
        o["beta_hat"] = vec_json(r.beta_hat);
        o["se"] = vec_json(r.se);
        o["active"] = r.active;
        o["sigma2_hat"] = scalar_json(r.sigma2_hat);
        o["rmse_alpha"] = scalar_json(r.rmse_alpha);
        o["lambda0"] = scalar_json(r.lambda0);
        o["lambda1"] = scalar_json(r.lambda1);
        o["lambda2"] = scalar_json(r.lambda2);
      } else {
        o["error"] = r.error;
      }
      recs.push_back(std::move(o));
    }
    j["replications"] = recs;
  }
  return j;
}

SimOutput run_monte_carlo(const SimConfig& cfg, std::shared_ptr<const PenalizedBasis> basis) {
  cfg.check();
  const Triangulation& mesh = basis->space().mesh();
  const std::vector<Point2> pool =
      cfg.example == Example::Horseshoe ? horseshoe_grid(mesh) : lattice_grid(mesh, 20);
  if (pool.empty()) throw InputError("the mesh contains none of the design grid points");
  Vector alpha_grid = Vector::Zero(static_cast<Eigen::Index>(pool.size()));
  if (cfg.example == Example::Horseshoe) {
    for (std::size_t i = 0; i < pool.size(); ++i) alpha_grid[static_cast<Eigen::Index>(i)] = horseshoe_function(pool[i]);
  }
  const Vector beta_true = cfg.beta();
  FitConfig fit_cfg = cfg.fit;
  if (cfg.oracle) {
    std::vector<int> support;
    for (Eigen::Index j = 0; j < beta_true.size(); ++j) {
      if (beta_true[j] != 0.0) support.push_back(static_cast<int>(j));
    }
    fit_cfg.oracle_support = support;
  }
  basis->spectrum();  // build shared state before the workers start

  SimOutput out;
  out.config = cfg;
  out.records.resize(static_cast<std::size_t>(cfg.replications));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < cfg.replications; k = next++) {
      ReplicationRecord& rec = out.records[static_cast<std::size_t>(k)];
      rec.index = k;
      try {
        const SimDataset ds = generate_dataset(cfg, k, pool);
        const FitResult fit = fit_plsm(ds.data, basis, fit_cfg);
        rec.beta_hat = fit.beta;
        rec.se = Vector::Constant(beta_true.size(), kNaN);
        for (std::size_t a = 0; a < fit.active.size(); ++a) rec.se[fit.active[a]] = fit.se[static_cast<Eigen::Index>(a)];
        rec.active = fit.active;
        rec.sigma2_hat = fit.sigma2_hat;
        rec.lambda0 = fit.lambda0;
        rec.lambda1 = fit.lambda1;
        rec.lambda2 = fit.lambda2;
        rec.rmse_alpha = centered_rmse(predict_surface(basis->space(), fit, pool), alpha_grid);
        rec.ok = true;
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
      }
    }
  };
  const int nthreads = std::min(cfg.threads, cfg.replications);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool_threads;
    for (int t = 0; t < nthreads; ++t) pool_threads.emplace_back(worker);
    for (auto& t : pool_threads) t.join();
  }

  std::vector<Vector> betas;
  std::vector<double> alpha_errors;
  int failures = 0;
  for (const auto& rec : out.records) {
    if (!rec.ok) {
      ++failures;
      continue;
    }
    betas.push_back(rec.beta_hat);
    alpha_errors.push_back(rec.rmse_alpha);
  }
  if (failures * 10 > cfg.replications) {
    throw NumericalError(std::to_string(failures) + " of " + std::to_string(cfg.replications) +
                         " replications failed; first error: " +
                         std::find_if(out.records.begin(), out.records.end(), [](const auto& r) { return !r.ok; })->error);
  }
  out.metrics = metrics(betas, beta_true, alpha_errors);
  out.metrics.failures = failures;
  for (Eigen::Index j = 0; j < beta_true.size(); ++j) {
    double sum = 0.0;
    int count = 0;
    for (const auto& rec : out.records) {
      if (rec.ok && std::isfinite(rec.se[j])) {
        sum += rec.se[j];
        ++count;
      }
    }
    if (count > 0) out.metrics.mean_se[j] = sum / count;
  }
  return out;
}

}  // namespace plsm
