#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "plsm/fit.hpp"
#include "plsm/select.hpp"
#include "plsm/sim.hpp"
#include "plsm/space.hpp"

namespace py = pybind11;
using namespace plsm;

namespace {

std::vector<Point2> to_points(const Matrix& x) {
  if (x.cols() != 2) throw InputError("locations must be an (n, 2) array");
  std::vector<Point2> pts(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) pts[static_cast<std::size_t>(i)] = {x(i, 0), x(i, 1)};
  return pts;
}

std::shared_ptr<const PenalizedBasis> make_basis(const std::string& mesh, int degree, int smoothness,
                                                 std::optional<std::string> cache_dir, bool use_cache) {
  if (smoothness >= degree) throw InputError("smoothness must be smaller than the degree");
  if (degree < 2) throw InputError("degree must be at least 2 for the roughness penalty");
  auto tri = std::make_shared<const Triangulation>(resolve_mesh(mesh));
  auto space = std::make_shared<const SplineSpace>(tri, degree, smoothness);
  BuildOptions opts;
  if (use_cache) opts.cache_dir = cache_dir ? std::filesystem::path(*cache_dir) : default_cache_dir();
  return PenalizedBasis::build(space, opts);
}

struct Model {
  std::shared_ptr<const PenalizedBasis> basis;
  FitResult fit;
};

Model fit_model(std::shared_ptr<PenalizedBasis> basis, const Vector& y, const std::optional<Matrix>& z,
                const Matrix& x, std::vector<double> lambda0_grid, std::vector<double> lambda1_grid,
                std::vector<double> lambda2_grid, std::optional<std::vector<int>> oracle,
                std::vector<std::string> names) {
  DesignData d;
  d.y = y;
  d.z = z ? *z : Matrix(y.size(), 0);
  d.x = to_points(x);
  d.names = std::move(names);
  FitConfig cfg;
  cfg.lambda0_grid = std::move(lambda0_grid);
  cfg.lambda1_grid = std::move(lambda1_grid);
  cfg.lambda2_grid = std::move(lambda2_grid);
  cfg.oracle_support = std::move(oracle);
  std::shared_ptr<const PenalizedBasis> shared = std::move(basis);
  return {shared, fit_plsm(d, shared, cfg)};
}

std::string simulate(const std::string& example, double rho, long n, double sigma, int reps, std::uint64_t seed,
                     int threads, bool oracle, const std::string& mesh, int degree, int smoothness,
                     std::optional<std::string> cache_dir, bool use_cache) {
  SimConfig cfg;
  cfg.example = parse_example(example);
  cfg.rho = rho;
  cfg.n = n > 0 ? n : (cfg.example == Example::Horseshoe ? 200 : 100);
  cfg.sigma = sigma;
  cfg.replications = reps;
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.oracle = oracle;
  cfg.mesh = mesh;
  cfg.degree = degree;
  cfg.smoothness = smoothness;
  cfg.check();
  const auto basis = make_basis(cfg.mesh_id(), degree, smoothness, std::move(cache_dir), use_cache);
  py::gil_scoped_release release;
  return run_monte_carlo(cfg, basis).to_json(true).dump();
}

}  // namespace

PYBIND11_MODULE(_plsm, m) {
  m.doc() = "Partially linear spatial models with bivariate penalized splines";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<PenalizedBasis, std::shared_ptr<PenalizedBasis>>(m, "Basis")
      .def(py::init([](const std::string& mesh, int degree, int smoothness, std::optional<std::string> cache_dir,
                       bool use_cache) {
             return std::const_pointer_cast<PenalizedBasis>(
                 make_basis(mesh, degree, smoothness, std::move(cache_dir), use_cache));
           }),
           py::arg("mesh") = "tri2", py::arg("degree") = 5, py::arg("smoothness") = 1,
           py::arg("cache_dir") = py::none(), py::arg("use_cache") = true)
      .def_property_readonly("degree", [](const PenalizedBasis& b) { return b.space().degree(); })
      .def_property_readonly("smoothness", [](const PenalizedBasis& b) { return b.space().smoothness(); })
      .def_property_readonly("n_triangles", [](const PenalizedBasis& b) { return b.space().mesh().num_triangles(); })
      .def_property_readonly("n_coefficients", [](const PenalizedBasis& b) { return b.space().size(); })
      .def_property_readonly("n_free", &PenalizedBasis::reduced_size)
      .def_property_readonly("constraint_rank", &PenalizedBasis::constraint_rank)
      .def_property_readonly("q2", &PenalizedBasis::q2)
      .def_property_readonly("cache_key", &PenalizedBasis::cache_key)
      .def(
          "contains",
          [](const PenalizedBasis& b, const Matrix& x) {
            const auto pts = to_points(x);
            std::vector<bool> out(pts.size());
            for (std::size_t i = 0; i < pts.size(); ++i) out[i] = b.space().mesh().locate(pts[i]).has_value();
            return out;
          },
          py::arg("x"))
      .def("basis_matrix",
           [](const PenalizedBasis& b, const Matrix& x) { return Matrix(eval_basis_matrix(b.space(), to_points(x))); },
           py::arg("x"));

  py::class_<Model>(m, "Model")
      .def_property_readonly("beta", [](const Model& md) { return md.fit.beta; })
      .def_property_readonly("active", [](const Model& md) { return md.fit.active; })
      .def_property_readonly("names", [](const Model& md) { return md.fit.names; })
      .def_property_readonly("se", [](const Model& md) { return md.fit.se; })
      .def_property_readonly("cov", [](const Model& md) { return md.fit.cov; })
      .def_property_readonly("sigma2", [](const Model& md) { return md.fit.sigma2_hat; })
      .def_property_readonly("fitted", [](const Model& md) { return md.fit.fitted; })
      .def_property_readonly("gamma", [](const Model& md) { return md.fit.gamma; })
      .def_property_readonly("lambdas",
                             [](const Model& md) {
                               return py::dict(py::arg("lambda0") = md.fit.lambda0, py::arg("lambda1") = md.fit.lambda1,
                                               py::arg("lambda2") = md.fit.lambda2);
                             })
      .def(
          "predict",
          [](const Model& md, const Matrix& x, const std::optional<Matrix>& z) {
            const auto pts = to_points(x);
            const Matrix zz = z ? *z : Matrix(x.rows(), md.fit.beta.size());
            if (!z && md.fit.beta.size() > 0) throw InputError("covariates are required for prediction");
            return predict_values(md.basis->space(), md.fit, zz, pts);
          },
          py::arg("x"), py::arg("z") = py::none())
      .def(
          "surface", [](const Model& md, const Matrix& x) { return predict_surface(md.basis->space(), md.fit, to_points(x)); },
          py::arg("x"))
      .def("to_json", [](const Model& md) { return md.fit.to_json().dump(); });

  m.def("fit", &fit_model, py::arg("basis"), py::arg("y"), py::arg("z"), py::arg("x"),
        py::arg("lambda0_grid") = std::vector<double>{}, py::arg("lambda1_grid") = std::vector<double>{},
        py::arg("lambda2_grid") = std::vector<double>{}, py::arg("oracle") = py::none(),
        py::arg("names") = std::vector<std::string>{}, py::call_guard<py::gil_scoped_release>());

  m.def("simulate_json", &simulate, py::arg("example") = "horseshoe", py::arg("rho") = 0.3, py::arg("n") = -1,
        py::arg("sigma") = 0.2, py::arg("reps") = 100, py::arg("seed") = 42, py::arg("threads") = 1,
        py::arg("oracle") = false, py::arg("mesh") = "", py::arg("degree") = 5, py::arg("smoothness") = 1,
        py::arg("cache_dir") = py::none(), py::arg("use_cache") = true);

  m.def(
      "mesh_check_json",
      [](const std::string& mesh) {
        const Triangulation tri = resolve_mesh(mesh);
        nlohmann::json j = validate(tri).to_json();
        j["hash"] = tri.hash();
        return j.dump();
      },
      py::arg("mesh"));

  m.def(
      "scad_value", [](double beta, double lambda, double a) { return scad_value(beta, ScadPenalty(lambda, a)); },
      py::arg("beta"), py::arg("lam"), py::arg("a") = kScadA);
  m.def(
      "scad_threshold", [](double z, double lambda, double a) { return scad_threshold(z, ScadPenalty(lambda, a)); },
      py::arg("z"), py::arg("lam"), py::arg("a") = kScadA);
  m.def("bundled_meshes", &bundled_mesh_ids);
}
