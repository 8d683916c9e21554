#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "plsm/fit.hpp"

namespace plsm {

/// Directory holding the bundled meshes: $PLSM_DATA_DIR if set, else the build-time location.
std::filesystem::path data_dir();
/// Ids of the bundled meshes (tri1, tri2, tri3, lattice, usa).
const std::vector<std::string>& bundled_mesh_ids();
/// A bundled id or any path accepted by load_mesh; unknown ids that are not files raise InputError.
Triangulation resolve_mesh(const std::string& id_or_path);

/// Portable generator: mt19937_64 seeded through SplitMix64, with its own uniform and normal transforms
/// so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  /// Stream for replication k of a run with base seed `base`: seed SplitMix64(base + k).
  static Rng for_replication(std::uint64_t base, std::uint64_t k);

  double uniform();                    ///< [0, 1) with 53 random bits
  double uniform(double lo, double hi);
  double normal();                     ///< standard normal by Box-Muller
  std::size_t below(std::size_t bound);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

inline constexpr double kHorseshoeR0 = 0.1;
inline constexpr double kHorseshoeR = 0.5;
inline constexpr double kHorseshoeL = 3.0;

/// (a, d) coordinates along and across the horseshoe spine.
std::pair<double, double> horseshoe_coordinates(const Point2& p);
/// |d| <= r - r0 and x <= l.
bool horseshoe_contains(const Point2& p, double tol = 1e-12);
/// f = a + d^2; throws InputError outside the domain.
double horseshoe_function(const Point2& p);

/// 180 x 80 grid over [-1, 3.5] x [-1, 1] restricted to the horseshoe and to the mesh.
std::vector<Point2> horseshoe_grid(const Triangulation& mesh);
/// k x k lattice over [0, 1]^2 restricted to the mesh.
std::vector<Point2> lattice_grid(const Triangulation& mesh, int k = 20);

/// Columns 1 and 3 entangled with X1/X2 at level rho, the rest Uniform(-1, 1).
Matrix generate_covariates(std::span<const Point2> x, double rho, Rng& rng);

/// Squared-exponential covariance sigma_p^2 exp(-h^2 / (2 phi^2)).
double gp_covariance(double h, double sigma_p, double phi);

enum class Example { Horseshoe, CorrelatedNoise };
Example parse_example(const std::string& name);
std::string example_name(Example e);

struct SimConfig {
  Example example = Example::Horseshoe;
  Eigen::Index n = 200;
  double rho = 0.3;
  double sigma = 0.2;
  Vector beta_true;       ///< empty: (1, -1, 0, 0, 0, 0, 0, 0)
  std::string mesh = "";  ///< empty: tri2 for the horseshoe, lattice for correlated noise
  int degree = 5;
  int smoothness = 1;
  int replications = 100;
  std::uint64_t seed = 42;
  double gp_sigma = 0.2;
  double gp_range = 0.1 * 1.4142135623730951;
  bool oracle = false;
  int threads = 1;
  FitConfig fit;

  Vector beta() const;
  std::string mesh_id() const;
  void check() const;
  nlohmann::json to_json() const;
};

struct SimDataset {
  DesignData data;
  Vector alpha;  ///< true alpha at the sampled locations
};

/// Dataset for one replication. Draw order: locations, then covariates row by row, then noise.
SimDataset generate_dataset(const SimConfig& cfg, int replication, std::span<const Point2> pool);

struct ReplicationRecord {
  int index = 0;
  bool ok = false;
  std::string error;
  Vector beta_hat;
  Vector se;  ///< full p-vector, NaN for inactive coefficients
  double sigma2_hat = 0.0;
  double rmse_alpha = 0.0;
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::vector<int> active;
};

struct SimMetrics {
  double F = 0.0;
  double T = 0.0;
  double C = 0.0;
  Vector rmse_beta;
  double rmse_alpha = 0.0;
  Vector mean_se;  ///< mean estimated SE per coefficient over replications where it was selected
  Vector sd_beta;  ///< Monte Carlo SD of the estimates
  int replications = 0;
  int failures = 0;

  nlohmann::json to_json() const;
};

/// F, T, C and per-coefficient RMSE over replications; alpha_errors are per-replication alpha RMSEs.
SimMetrics metrics(const std::vector<Vector>& beta_hats, const Vector& beta_true, const std::vector<double>& alpha_errors);

struct SimOutput {
  SimConfig config;
  SimMetrics metrics;
  std::vector<ReplicationRecord> records;

  nlohmann::json to_json(bool include_records = true) const;
};

/// Runs the replications over a thread pool sharing one assembled basis.
SimOutput run_monte_carlo(const SimConfig& cfg, std::shared_ptr<const PenalizedBasis> basis);

/// Centered alpha RMSE on the evaluation points.
double centered_rmse(const Vector& estimate, const Vector& truth);

}  // namespace plsm
