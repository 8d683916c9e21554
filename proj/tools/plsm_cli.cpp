#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "plsm/csv.hpp"
#include "plsm/fit.hpp"
#include "plsm/sim.hpp"

namespace {

using namespace plsm;

struct CommonSpace {
  std::string mesh;
  int degree = 5;
  int smoothness = 1;
  std::string cache_dir;
  bool no_cache = false;
};

void add_space_options(CLI::App* cmd, CommonSpace& s) {
  cmd->add_option("--mesh", s.mesh, "Bundled mesh id (tri1, tri2, tri3, lattice, usa), JSON file, or CSV prefix")
      ->required();
  cmd->add_option("--degree,-d", s.degree, "Spline degree")->check(CLI::Range(1, 20));
  cmd->add_option("--smoothness,-r", s.smoothness, "Smoothness order")->check(CLI::Range(0, 19));
  cmd->add_option("--cache-dir", s.cache_dir, "Directory for cached null-space and spectrum files");
  cmd->add_flag("--no-cache", s.no_cache, "Do not read or write the cache");
}

std::shared_ptr<const PenalizedBasis> build_basis(const CommonSpace& s, const std::string& mesh_spec) {
  auto mesh = std::make_shared<const Triangulation>(resolve_mesh(mesh_spec));
  if (s.smoothness >= s.degree) throw InputError("smoothness must be smaller than the degree");
  if (s.degree < 2) throw InputError("degree must be at least 2 for the roughness penalty");
  if (s.degree < 3 * s.smoothness + 2) {
    std::cerr << "warning: degree " << s.degree << " is below 3r+2 = " << 3 * s.smoothness + 2 << "\n";
  }
  auto space = std::make_shared<const SplineSpace>(mesh, s.degree, s.smoothness);
  BuildOptions opts;
  if (!s.no_cache) opts.cache_dir = s.cache_dir.empty() ? default_cache_dir() : std::filesystem::path(s.cache_dir);
  return PenalizedBasis::build(space, opts);
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("invalid number '" + item + "' in grid list");
    }
  }
  return out;
}

struct Columns {
  std::string y;
  std::string z;
  std::string x;
};

std::pair<std::string, std::string> location_columns(const std::string& spec) {
  const auto parts = split_list(spec);
  if (parts.size() != 2) throw InputError("--x needs exactly two column names, e.g. --x lon,lat");
  return {parts[0], parts[1]};
}

std::vector<Point2> read_points(const CsvTable& table, const std::string& spec) {
  const auto [cx, cy] = location_columns(spec);
  const auto xs = table.numeric(cx);
  const auto ys = table.numeric(cy);
  std::vector<Point2> pts(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) pts[i] = {xs[i], ys[i]};
  return pts;
}

Matrix read_matrix(const CsvTable& table, const std::vector<std::string>& names) {
  Matrix z(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto col = table.numeric(names[j]);
    for (std::size_t i = 0; i < col.size(); ++i) z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return z;
}

DesignData read_design(const CsvTable& table, const Columns& cols) {
  DesignData d;
  d.names = split_list(cols.z);
  const auto [cx, cy] = location_columns(cols.x);
  std::vector<std::string> roles = d.names;
  roles.push_back(cols.y);
  roles.push_back(cx);
  roles.push_back(cy);
  std::vector<std::string> sorted = roles;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InputError("column roles must be disjoint (response, covariates and locations overlap)");
  }
  const auto y = table.numeric(cols.y);
  d.y = Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
  d.z = read_matrix(table, d.names);
  d.x = read_points(table, cols.x);
  return d;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

std::string gcv_csv(const std::vector<GcvRow>& rows) {
  std::ostringstream os;
  os << "lambda,rss,trace,gcv\n";
  for (const auto& r : rows) {
    os << format_double(r.lambda) << ',' << format_double(r.rss) << ',' << format_double(r.trace) << ','
       << (std::isfinite(r.gcv) ? format_double(r.gcv) : "NA") << '\n';
  }
  return os.str();
}

std::string path_csv(const FitResult& fit) {
  std::ostringstream os;
  os << "lambda2,rss,df,bic,iterations,converged";
  for (const auto& name : fit.names) os << ",beta_" << name;
  os << '\n';
  for (const auto& r : fit.path) {
    os << format_double(r.lambda) << ',' << format_double(r.rss) << ',' << r.df << ','
       << (std::isfinite(r.bic) ? format_double(r.bic) : "NA") << ',' << r.iterations << ',' << (r.converged ? 1 : 0);
    for (Eigen::Index j = 0; j < r.beta.size(); ++j) os << ',' << format_double(r.beta[j]);
    os << '\n';
  }
  return os.str();
}

std::pair<int, int> parse_grid_size(const std::string& spec) {
  const auto pos = spec.find_first_of("xX");
  int w = 0;
  int h = 0;
  try {
    if (pos == std::string::npos) throw std::invalid_argument(spec);
    w = std::stoi(spec.substr(0, pos));
    h = std::stoi(spec.substr(pos + 1));
  } catch (const std::exception&) {
    throw InputError("--surface-grid expects WxH, e.g. 200x100");
  }
  if (w < 2 || h < 2) throw InputError("--surface-grid needs at least 2 points per side");
  return {w, h};
}

std::string surface_csv(const SplineSpace& space, const FitResult& fit, int w, int h) {
  const auto box = space.mesh().bounding_box();
  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      pts.push_back({box[0] + (box[2] - box[0]) * i / (w - 1), box[1] + (box[3] - box[1]) * j / (h - 1)});
    }
  }
  const Vector alpha = predict_surface(space, fit, pts);
  std::ostringstream os;
  os << "x,y,alpha\n";
  for (std::size_t k = 0; k < pts.size(); ++k) {
    os << format_double(pts[k].x) << ',' << format_double(pts[k].y) << ','
       << format_double(alpha[static_cast<Eigen::Index>(k)]) << '\n';
  }
  return os.str();
}

void standardize(DesignData& d, Vector& center, Vector& scale) {
  const Eigen::Index p = d.z.cols();
  center = d.z.colwise().mean().transpose();
  scale.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double sd = std::sqrt((d.z.col(j).array() - center[j]).square().mean());
    if (!(sd > 0.0)) throw InputError("covariate '" + d.names[static_cast<std::size_t>(j)] + "' is constant");
    scale[j] = sd;
  }
  for (Eigen::Index i = 0; i < d.z.rows(); ++i) {
    for (Eigen::Index j = 0; j < p; ++j) d.z(i, j) = (d.z(i, j) - center[j]) / scale[j];
  }
}

struct FitOptions {
  CommonSpace space;
  std::string data;
  Columns cols;
  std::string out;
  std::string lambda_grid;
  std::string lambda1_grid;
  std::string lambda2_grid;
  int n_lambda2 = 50;
  double lambda2_ratio = 1e-3;
  double scad_a = kScadA;
  int max_iter = 1000;
  double tol = 1e-7;
  std::string oracle;
  std::string surface_grid;
  std::string surface_out;
  std::string dump_gcv;
  std::string dump_path;
  bool standardize = false;
  std::uint64_t seed = 42;
};

FitConfig make_fit_config(const FitOptions& o, const std::vector<std::string>& names) {
  FitConfig cfg;
  if (!o.lambda_grid.empty()) cfg.lambda0_grid = parse_grid(o.lambda_grid);
  if (!o.lambda1_grid.empty()) cfg.lambda1_grid = parse_grid(o.lambda1_grid);
  if (!o.lambda2_grid.empty()) cfg.lambda2_grid = parse_grid(o.lambda2_grid);
  cfg.n_lambda2 = o.n_lambda2;
  cfg.lambda2_ratio = o.lambda2_ratio;
  cfg.scad_a = o.scad_a;
  cfg.cd.max_iter = o.max_iter;
  cfg.cd.tol = o.tol;
  if (!o.oracle.empty()) {
    std::vector<int> support;
    for (const auto& name : split_list(o.oracle)) {
      const auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) throw InputError("oracle covariate '" + name + "' is not among --z");
      support.push_back(static_cast<int>(it - names.begin()));
    }
    cfg.oracle_support = support;
  }
  return cfg;
}

int cmd_fit(const FitOptions& o) {
  const CsvTable table = read_csv_file(o.data);
  DesignData data = read_design(table, o.cols);
  Vector center, scale;
  if (o.standardize && data.p() > 0) standardize(data, center, scale);
  const auto basis = build_basis(o.space, o.space.mesh);
  FitResult fit = fit_plsm(data, basis, make_fit_config(o, data.names));
  fit.z_center = center;
  fit.z_scale = scale;
  nlohmann::json j = fit.to_json();
  j["model"]["mesh"] = o.space.mesh;
  j["tuning"] = {{"lambda0", "GCV on the response (step 0)"},
                 {"lambda1", "GCV on the profiled refit (step 2); also used for the sandwich smoother"},
                 {"lambda2", "BIC over the SCAD path (step 1)"}};
  write_text(o.out, j.dump(2) + "\n");
  if (!o.dump_gcv.empty()) {
    write_text(o.dump_gcv, gcv_csv(fit.gcv0));
    write_text(o.dump_gcv + ".step2.csv", gcv_csv(fit.gcv1));
  }
  if (!o.dump_path.empty()) write_text(o.dump_path, path_csv(fit));
  if (!o.surface_grid.empty()) {
    const auto [w, h] = parse_grid_size(o.surface_grid);
    std::string target = o.surface_out;
    if (target.empty()) target = (o.out.empty() || o.out == "-") ? "surface.csv" : o.out + ".surface.csv";
    write_text(target, surface_csv(basis->space(), fit, w, h));
  }
  return 0;
}

struct PredictOptions {
  CommonSpace space;
  std::string model;
  std::string data;
  std::string x;
  std::string z;
  std::string out;
  bool surface_only = false;
};

int cmd_predict(const PredictOptions& o) {
  std::ifstream in(o.model);
  if (!in) throw InputError("cannot open model '" + o.model + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model JSON: ") + e.what());
  }
  const FitResult fit = FitResult::from_json(j);
  std::string mesh_spec = o.space.mesh;
  if (mesh_spec.empty()) {
    if (!j["model"].contains("mesh")) throw InputError("model does not record its mesh; pass --mesh");
    mesh_spec = j["model"]["mesh"].get<std::string>();
  }
  auto mesh = std::make_shared<const Triangulation>(resolve_mesh(mesh_spec));
  if (mesh->hash() != fit.mesh_hash) {
    throw InputError("mesh hash mismatch: model was fitted on " + fit.mesh_hash + ", mesh '" + mesh_spec + "' is " +
                     mesh->hash());
  }
  const SplineSpace space(mesh, fit.degree, fit.smoothness);
  const CsvTable table = read_csv_file(o.data);
  const std::vector<Point2> pts = read_points(table, o.x);
  const Vector alpha = predict_surface(space, fit, pts);
  Vector pred = alpha;
  if (!o.surface_only) {
    const std::vector<std::string> names = o.z.empty() ? fit.names : split_list(o.z);
    if (names.size() != fit.names.size()) throw InputError("--z must list as many covariates as the model has");
    pred = predict_values(space, fit, read_matrix(table, names), pts);
  }
  const auto [cx, cy] = location_columns(o.x);
  std::ostringstream os;
  os << cx << ',' << cy << ",alpha,prediction\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    os << format_double(pts[i].x) << ',' << format_double(pts[i].y) << ',' << format_double(alpha[k]) << ','
       << format_double(pred[k]) << '\n';
  }
  write_text(o.out, os.str());
  return 0;
}

struct SimulateOptions {
  CommonSpace space;
  std::string example = "horseshoe";
  double rho = 0.3;
  long n = -1;
  double sigma = 0.2;
  int reps = 100;
  std::uint64_t seed = 42;
  int threads = 1;
  bool oracle = false;
  double gp_sigma = 0.2;
  double gp_range = 0.1 * 1.4142135623730951;
  std::string out;
  std::string dump_reps;
};

std::string reps_csv(const SimOutput& out) {
  std::ostringstream os;
  const Eigen::Index p = out.config.beta().size();
  os << "replication,ok";
  for (Eigen::Index j = 0; j < p; ++j) os << ",beta" << j + 1;
  for (Eigen::Index j = 0; j < p; ++j) os << ",se" << j + 1;
  os << ",sigma2_hat,rmse_alpha,lambda0,lambda1,lambda2,error\n";
  for (const auto& r : out.records) {
    os << r.index << ',' << (r.ok ? 1 : 0);
    for (Eigen::Index j = 0; j < p; ++j) os << ',' << (r.ok ? format_double(r.beta_hat[j]) : "NA");
    for (Eigen::Index j = 0; j < p; ++j) os << ',' << (r.ok ? format_double(r.se[j]) : "NA");
    if (r.ok) {
      os << ',' << format_double(r.sigma2_hat) << ',' << format_double(r.rmse_alpha) << ',' << format_double(r.lambda0)
         << ',' << format_double(r.lambda1) << ',' << format_double(r.lambda2) << ",\n";
    } else {
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), '"', '\'');
      os << ",NA,NA,NA,NA,NA,\"" << msg << "\"\n";
    }
  }
  return os.str();
}

int cmd_simulate(const SimulateOptions& o) {
  SimConfig cfg;
  cfg.example = parse_example(o.example);
  cfg.rho = o.rho;
  cfg.n = o.n > 0 ? o.n : (cfg.example == Example::Horseshoe ? 200 : 100);
  cfg.sigma = o.sigma;
  cfg.replications = o.reps;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  cfg.oracle = o.oracle;
  cfg.gp_sigma = o.gp_sigma;
  cfg.gp_range = o.gp_range;
  cfg.mesh = o.space.mesh;
  cfg.degree = o.space.degree;
  cfg.smoothness = o.space.smoothness;
  cfg.check();
  const auto basis = build_basis(o.space, cfg.mesh_id());
  const SimOutput result = run_monte_carlo(cfg, basis);
  write_text(o.out, result.to_json(true).dump(2) + "\n");
  if (!o.dump_reps.empty()) write_text(o.dump_reps, reps_csv(result));
  return 0;
}

int cmd_mesh_check(const std::string& mesh_spec) {
  const Triangulation mesh = resolve_mesh(mesh_spec);
  nlohmann::json j = validate(mesh).to_json();
  j["hash"] = mesh.hash();
  std::cout << j.dump(2) << "\n";
  return 0;
}

struct CvOptions {
  FitOptions fit;
  int folds = 10;
};

int cmd_cv(const CvOptions& o) {
  const CsvTable table = read_csv_file(o.fit.data);
  DesignData data = read_design(table, o.fit.cols);
  Vector center, scale;
  if (o.fit.standardize && data.p() > 0) standardize(data, center, scale);
  const Eigen::Index n = data.n();
  if (o.folds < 2 || o.folds > n) throw InputError("--folds must lie between 2 and the number of rows");
  const auto basis = build_basis(o.fit.space, o.fit.space.mesh);
  const FitConfig cfg = make_fit_config(o.fit, data.names);

  std::vector<int> fold(static_cast<std::size_t>(n));
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(splitmix64(o.fit.seed));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  for (std::size_t k = 0; k < order.size(); ++k) fold[order[k]] = static_cast<int>(k % static_cast<std::size_t>(o.folds));

  double total = 0.0;
  nlohmann::json per_fold = nlohmann::json::array();
  for (int f = 0; f < o.folds; ++f) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index i = 0; i < n; ++i) (fold[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    auto subset = [&](const std::vector<Eigen::Index>& idx) {
      DesignData d;
      d.names = data.names;
      d.y.resize(static_cast<Eigen::Index>(idx.size()));
      d.z.resize(static_cast<Eigen::Index>(idx.size()), data.p());
      for (std::size_t k = 0; k < idx.size(); ++k) {
        d.y[static_cast<Eigen::Index>(k)] = data.y[idx[k]];
        d.z.row(static_cast<Eigen::Index>(k)) = data.z.row(idx[k]);
        d.x.push_back(data.x[static_cast<std::size_t>(idx[k])]);
      }
      return d;
    };
    const DesignData tr = subset(train);
    const DesignData te = subset(test);
    const FitResult fit = fit_plsm(tr, basis, cfg);
    const Vector pred = predict_values(basis->space(), fit, te.z, te.x);
    const double sse = (pred - te.y).squaredNorm();
    total += sse;
    per_fold.push_back({{"fold", f}, {"n_test", te.n()}, {"mse", sse / static_cast<double>(te.n())},
                        {"active", fit.active}});
  }
  nlohmann::json j = {{"folds", o.folds}, {"n", n}, {"seed", o.fit.seed},
                      {"rmspe", std::sqrt(total / static_cast<double>(n))}, {"per_fold", per_fold}};
  write_text(o.fit.out, j.dump(2) + "\n");
  return 0;
}

void add_fit_options(CLI::App* cmd, FitOptions& o) {
  add_space_options(cmd, o.space);
  cmd->add_option("--data", o.data, "CSV file with a header row")->required();
  cmd->add_option("--y", o.cols.y, "Response column")->required();
  cmd->add_option("--z", o.cols.z, "Comma-separated covariate columns (may be empty)");
  cmd->add_option("--x", o.cols.x, "Two location columns, e.g. lon,lat")->required();
  cmd->add_option("--out,-o", o.out, "Output path (default stdout)");
  cmd->add_option("--lambda-grid", o.lambda_grid, "Comma-separated roughness grid for step 0 (and step 2)");
  cmd->add_option("--lambda1-grid", o.lambda1_grid, "Comma-separated roughness grid for step 2");
  cmd->add_option("--lambda2-grid", o.lambda2_grid, "Comma-separated descending SCAD grid");
  cmd->add_option("--n-lambda2", o.n_lambda2, "Number of SCAD grid points")->check(CLI::PositiveNumber);
  cmd->add_option("--lambda2-ratio", o.lambda2_ratio, "Smallest SCAD grid value relative to lambda_max");
  cmd->add_option("--scad-a", o.scad_a, "SCAD shape parameter");
  cmd->add_option("--max-iter", o.max_iter, "Coordinate descent sweeps")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", o.tol, "Coordinate descent tolerance");
  cmd->add_option("--oracle", o.oracle, "Skip selection and refit on these covariates");
  cmd->add_flag("--standardize", o.standardize, "Center and scale covariates before fitting");
  cmd->add_option("--seed", o.seed, "Seed (used by cv fold assignment)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Penalized partially linear spatial regression over triangulations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "plsm 1.0.0");

  FitOptions fit_opts;
  auto* fit = app.add_subcommand("fit", "Fit the model to a CSV dataset and write the result as JSON");
  add_fit_options(fit, fit_opts);
  fit->add_option("--surface-grid", fit_opts.surface_grid, "Also write alpha-hat on a WxH grid over the mesh box");
  fit->add_option("--surface-out", fit_opts.surface_out, "Path for the surface CSV (default <out>.surface.csv)");
  fit->add_option("--dump-gcv", fit_opts.dump_gcv, "Write the step 0 GCV table as CSV (step 2 to <path>.step2.csv)");
  fit->add_option("--dump-path", fit_opts.dump_path, "Write the SCAD path table as CSV");

  PredictOptions pred_opts;
  auto* pred = app.add_subcommand("predict", "Predict from a fitted model");
  pred->add_option("--model", pred_opts.model, "Model JSON written by fit")->required();
  pred->add_option("--data", pred_opts.data, "CSV with locations (and covariates)")->required();
  pred->add_option("--x", pred_opts.x, "Two location columns")->required();
  pred->add_option("--z", pred_opts.z, "Covariate columns (default: the model's names)");
  pred->add_option("--mesh", pred_opts.space.mesh, "Mesh (default: the one recorded in the model)");
  pred->add_option("--out,-o", pred_opts.out, "Output CSV (default stdout)");
  pred->add_flag("--surface-only", pred_opts.surface_only, "Predict alpha-hat only");

  SimulateOptions sim_opts;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo study of the simulation designs");
  sim->add_option("--example", sim_opts.example, "horseshoe or correlated-noise");
  sim->add_option("--rho", sim_opts.rho, "Covariate-location correlation level");
  sim->add_option("--n", sim_opts.n, "Sample size (default 200 horseshoe, 100 correlated-noise)");
  sim->add_option("--sigma", sim_opts.sigma, "Noise SD (horseshoe)");
  sim->add_option("--mesh", sim_opts.space.mesh, "Mesh id or path (default tri2 / lattice)");
  sim->add_option("--degree,-d", sim_opts.space.degree, "Spline degree")->check(CLI::Range(1, 20));
  sim->add_option("--smoothness,-r", sim_opts.space.smoothness, "Smoothness order")->check(CLI::Range(0, 19));
  sim->add_option("--reps", sim_opts.reps, "Replications")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_opts.seed, "Base seed; replication k uses base + k");
  sim->add_option("--threads", sim_opts.threads, "Worker threads")->check(CLI::PositiveNumber);
  sim->add_flag("--oracle", sim_opts.oracle, "Fit with the true support instead of selecting");
  sim->add_option("--gp-sigma", sim_opts.gp_sigma, "Noise process SD (correlated-noise)");
  sim->add_option("--gp-range", sim_opts.gp_range, "Noise process range phi (correlated-noise)");
  sim->add_option("--cache-dir", sim_opts.space.cache_dir, "Cache directory");
  sim->add_flag("--no-cache", sim_opts.space.no_cache, "Do not use the cache");
  sim->add_option("--out,-o", sim_opts.out, "Output JSON (default stdout)");
  sim->add_option("--dump-reps", sim_opts.dump_reps, "Per-replication CSV");

  std::string check_mesh;
  auto* check = app.add_subcommand("mesh-check", "Validate a mesh and print the report as JSON");
  check->add_option("mesh", check_mesh, "Mesh id or path")->required();

  CvOptions cv_opts;
  auto* cv = app.add_subcommand("cv", "K-fold cross-validated prediction error");
  add_fit_options(cv, cv_opts.fit);
  cv->add_option("--folds", cv_opts.folds, "Number of folds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*fit) return cmd_fit(fit_opts);
    if (*pred) return cmd_predict(pred_opts);
    if (*sim) return cmd_simulate(sim_opts);
    if (*check) return cmd_mesh_check(check_mesh);
    if (*cv) return cmd_cv(cv_opts);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
