#include "plsm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "plsm/csv.hpp"

namespace plsm {

namespace {

double cross(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

double dist(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Strict crossing of segments pq and rs (interiors intersect in a single point).
bool segments_cross(const Point2& p, const Point2& q, const Point2& r, const Point2& s, double eps) {
  const double d1 = cross(p, q, r), d2 = cross(p, q, s);
  const double d3 = cross(r, s, p), d4 = cross(r, s, q);
  return ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
         ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps));
}

}  // namespace

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json j;
  j["conforming"] = conforming;
  j["n_vertices"] = n_vertices;
  j["n_triangles"] = n_triangles;
  j["n_boundary_edges"] = n_boundary_edges;
  j["n_interior_edges"] = n_interior_edges;
  j["mesh_size"] = mesh_size;
  j["max_shape_param"] = max_shape_param;
  j["min_area"] = min_area;
  j["total_area"] = total_area;
  j["offending_pairs"] = nlohmann::json::array();
  for (auto [a, b] : offending_pairs) j["offending_pairs"].push_back({a, b});
  j["issues"] = issues;
  return j;
}

Triangulation::Triangulation(std::vector<Point2> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  if (vertices_.empty() || triangles_.empty()) throw InputError("mesh: no vertices or no triangles");
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!std::isfinite(vertices_[i].x) || !std::isfinite(vertices_[i].y))
      throw InputError("mesh: vertex " + std::to_string(i) + " is not finite");
  }

  std::vector<int> order(vertices_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return vertices_[a].x < vertices_[b].x || (vertices_[a].x == vertices_[b].x && vertices_[a].y < vertices_[b].y);
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const Point2& a = vertices_[order[i]];
      const Point2& b = vertices_[order[j]];
      if (b.x - a.x > 1e-12) break;
      if (std::abs(b.y - a.y) <= 1e-12)
        throw InputError("mesh: duplicate vertices " + std::to_string(std::min(order[i], order[j])) + " and " +
                         std::to_string(std::max(order[i], order[j])));
    }
  }

  const int nv = static_cast<int>(vertices_.size());
  areas_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    auto& v = triangles_[t].v;
    for (int k = 0; k < 3; ++k) {
      if (v[k] < 0 || v[k] >= nv)
        throw InputError("mesh: triangle " + std::to_string(t) + " references vertex " + std::to_string(v[k]) +
                         " out of range [0, " + std::to_string(nv) + ")");
    }
    if (v[0] == v[1] || v[1] == v[2] || v[0] == v[2])
      throw InputError("mesh: triangle " + std::to_string(t) + " repeats a vertex");
    double c = cross(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]);
    const double scale = std::max({dist(vertices_[v[0]], vertices_[v[1]]), dist(vertices_[v[1]], vertices_[v[2]]),
                                   dist(vertices_[v[0]], vertices_[v[2]])});
    if (std::abs(c) <= 1e-14 * scale * scale)
      throw InputError("mesh: triangle " + std::to_string(t) + " has zero area");
    if (c < 0) {
      std::swap(v[1], v[2]);
      c = -c;
    }
    areas_[t] = 0.5 * c;
  }
  build_edges();
  build_index();
}

void Triangulation::build_edges() {
  std::map<std::pair<int, int>, int> lookup;
  triangle_edges_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& v = triangles_[t].v;
    for (int k = 0; k < 3; ++k) {
      int a = v[(k + 1) % 3], b = v[(k + 2) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = lookup.try_emplace({a, b}, static_cast<int>(edges_.size()));
      if (inserted) edges_.push_back(Edge{a, b, {}});
      edges_[it->second].triangles.push_back(static_cast<int>(t));
      triangle_edges_[t][k] = it->second;
    }
  }
  mesh_size_ = 0.0;
  for (const Edge& e : edges_) mesh_size_ = std::max(mesh_size_, dist(vertices_[e.a], vertices_[e.b]));
}

void Triangulation::build_index() {
  xmin_ = xmax_ = vertices_[0].x;
  ymin_ = ymax_ = vertices_[0].y;
  for (const Point2& p : vertices_) {
    xmin_ = std::min(xmin_, p.x);
    xmax_ = std::max(xmax_, p.x);
    ymin_ = std::min(ymin_, p.y);
    ymax_ = std::max(ymax_, p.y);
  }
  const double w = std::max(xmax_ - xmin_, 1e-300), h = std::max(ymax_ - ymin_, 1e-300);
  const double cells = std::max(1.0, static_cast<double>(triangles_.size()));
  nx_ = std::max(1, static_cast<int>(std::ceil(std::sqrt(cells * w / h))));
  ny_ = std::max(1, static_cast<int>(std::ceil(cells / nx_)));
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  const double pad = 1e-9 * std::max(w, h);
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    double bx0 = 1e300, by0 = 1e300, bx1 = -1e300, by1 = -1e300;
    for (int k = 0; k < 3; ++k) {
      const Point2& p = vertex(static_cast<int>(t), k);
      bx0 = std::min(bx0, p.x);
      bx1 = std::max(bx1, p.x);
      by0 = std::min(by0, p.y);
      by1 = std::max(by1, p.y);
    }
    auto [i0, j0] = cell_of({bx0 - pad, by0 - pad});
    auto [i1, j1] = cell_of({bx1 + pad, by1 + pad});
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<int>(t));
  }
}

std::pair<int, int> Triangulation::cell_of(const Point2& p) const {
  const double w = std::max(xmax_ - xmin_, 1e-300), h = std::max(ymax_ - ymin_, 1e-300);
  int i = static_cast<int>(std::floor((p.x - xmin_) / w * nx_));
  int j = static_cast<int>(std::floor((p.y - ymin_) / h * ny_));
  return {std::clamp(i, 0, nx_ - 1), std::clamp(j, 0, ny_ - 1)};
}

double Triangulation::total_area() const { return std::accumulate(areas_.begin(), areas_.end(), 0.0); }

double Triangulation::longest_edge(int t) const {
  const Point2 &a = vertex(t, 0), &b = vertex(t, 1), &c = vertex(t, 2);
  return std::max({dist(a, b), dist(b, c), dist(a, c)});
}

double Triangulation::inradius(int t) const {
  const Point2 &a = vertex(t, 0), &b = vertex(t, 1), &c = vertex(t, 2);
  const double semi = 0.5 * (dist(a, b) + dist(b, c) + dist(a, c));
  return areas_[t] / semi;
}

Barycentric Triangulation::barycentric(int t, const Point2& p) const {
  if (t < 0 || static_cast<std::size_t>(t) >= triangles_.size())
    throw InputError("mesh: triangle id " + std::to_string(t) + " out of range");
  const Point2 &p1 = vertex(t, 0), &p2 = vertex(t, 1), &p3 = vertex(t, 2);
  const double det = (p2.x - p1.x) * (p3.y - p1.y) - (p3.x - p1.x) * (p2.y - p1.y);
  if (det == 0.0) throw NumericalError("mesh: degenerate triangle " + std::to_string(t));
  Barycentric b;
  b.b2 = ((p.x - p1.x) * (p3.y - p1.y) - (p3.x - p1.x) * (p.y - p1.y)) / det;
  b.b3 = ((p2.x - p1.x) * (p.y - p1.y) - (p.x - p1.x) * (p2.y - p1.y)) / det;
  b.b1 = 1.0 - b.b2 - b.b3;
  return b;
}

Point2 Triangulation::to_cartesian(int t, const Barycentric& b) const {
  const Point2 &p1 = vertex(t, 0), &p2 = vertex(t, 1), &p3 = vertex(t, 2);
  return {b.b1 * p1.x + b.b2 * p2.x + b.b3 * p3.x, b.b1 * p1.y + b.b2 * p2.y + b.b3 * p3.y};
}

std::optional<Location> Triangulation::locate(const Point2& p) const {
  const double pad = 1e-9 * std::max(xmax_ - xmin_, ymax_ - ymin_);
  if (!(p.x >= xmin_ - pad && p.x <= xmax_ + pad && p.y >= ymin_ - pad && p.y <= ymax_ + pad)) return std::nullopt;
  auto [i, j] = cell_of(p);
  std::optional<Location> best;
  for (int t : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
    if (best && t > best->triangle) continue;
    Barycentric b = barycentric(t, p);
    if (b.inside()) best = Location{t, b};
  }
  return best;
}

std::string Triangulation::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const Point2& p : vertices_) {
    feed(&p.x, sizeof(double));
    feed(&p.y, sizeof(double));
  }
  for (const Triangle& t : triangles_) {
    for (int v : t.v) {
      const std::int32_t w = v;
      feed(&w, sizeof w);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Triangulation load_mesh(std::istream& vertex_source, std::istream& triangle_source) {
  CsvTable vt = read_csv(vertex_source);
  CsvTable tt = read_csv(triangle_source);
  const auto xs = vt.numeric("x"), ys = vt.numeric("y");
  std::vector<Point2> verts(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) verts[i] = {xs[i], ys[i]};
  const auto c1 = tt.numeric("v1"), c2 = tt.numeric("v2"), c3 = tt.numeric("v3");
  std::vector<Triangle> tris(c1.size());
  for (std::size_t t = 0; t < c1.size(); ++t) {
    for (double v : {c1[t], c2[t], c3[t]}) {
      if (v != std::floor(v)) throw InputError("mesh: non-integer vertex index in triangle row " + std::to_string(t));
    }
    tris[t].v = {static_cast<int>(c1[t]), static_cast<int>(c2[t]), static_cast<int>(c3[t])};
  }
  return Triangulation(std::move(verts), std::move(tris));
}

Triangulation load_mesh_json(std::istream& source) {
  nlohmann::json j;
  try {
    source >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("mesh: invalid JSON: ") + e.what());
  }
  if (!j.contains("vertices") || !j.contains("triangles"))
    throw InputError("mesh: JSON needs 'vertices' and 'triangles' arrays");
  std::vector<Point2> verts;
  std::vector<Triangle> tris;
  try {
    for (const auto& v : j.at("vertices")) verts.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
    for (const auto& t : j.at("triangles"))
      tris.push_back(Triangle{{t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()}});
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("mesh: malformed JSON entry: ") + e.what());
  }
  return Triangulation(std::move(verts), std::move(tris));
}

Triangulation load_mesh(const std::string& spec) {
  namespace fs = std::filesystem;
  auto open = [](const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw InputError("cannot open mesh file '" + p.string() + "'");
    return in;
  };
  if (auto comma = spec.find(','); comma != std::string::npos) {
    auto vin = open(spec.substr(0, comma));
    auto tin = open(spec.substr(comma + 1));
    return load_mesh(vin, tin);
  }
  const fs::path path(spec);
  if (path.extension() == ".json") {
    auto in = open(path);
    return load_mesh_json(in);
  }
  if (fs::is_directory(path)) {
    auto vin = open(path / "vertices.csv");
    auto tin = open(path / "triangles.csv");
    return load_mesh(vin, tin);
  }
  auto vin = open(spec + "_vertices.csv");
  auto tin = open(spec + "_triangles.csv");
  return load_mesh(vin, tin);
}

void write_mesh_csv(const Triangulation& mesh, std::ostream& vertices, std::ostream& triangles) {
  vertices << "x,y\n";
  for (const Point2& p : mesh.vertices()) vertices << format_double(p.x) << ',' << format_double(p.y) << '\n';
  triangles << "v1,v2,v3\n";
  for (const Triangle& t : mesh.triangles()) triangles << t.v[0] << ',' << t.v[1] << ',' << t.v[2] << '\n';
}

nlohmann::json mesh_to_json(const Triangulation& mesh) {
  nlohmann::json j;
  j["vertices"] = nlohmann::json::array();
  for (const Point2& p : mesh.vertices()) j["vertices"].push_back({p.x, p.y});
  j["triangles"] = nlohmann::json::array();
  for (const Triangle& t : mesh.triangles()) j["triangles"].push_back({t.v[0], t.v[1], t.v[2]});
  return j;
}

ValidationReport validate(const Triangulation& mesh) {
  ValidationReport rep;
  rep.n_vertices = mesh.num_vertices();
  rep.n_triangles = mesh.num_triangles();
  rep.mesh_size = mesh.mesh_size();
  rep.total_area = mesh.total_area();
  rep.min_area = *std::min_element(mesh.areas().begin(), mesh.areas().end());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    rep.max_shape_param = std::max(rep.max_shape_param, mesh.shape_param(static_cast<int>(t)));

  std::set<std::pair<int, int>> offenders;
  for (const Edge& e : mesh.edges()) {
    if (e.triangles.size() == 1) {
      ++rep.n_boundary_edges;
    } else if (e.triangles.size() == 2) {
      ++rep.n_interior_edges;
    } else {
      rep.issues.push_back("edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ") shared by " +
                           std::to_string(e.triangles.size()) + " triangles");
      for (std::size_t i = 0; i < e.triangles.size(); ++i)
        for (std::size_t j = i + 1; j < e.triangles.size(); ++j) offenders.insert({e.triangles[i], e.triangles[j]});
    }
  }

  // Candidate pairs: triangles whose bounding boxes overlap.
  const auto& tris = mesh.triangles();
  const int nt = static_cast<int>(tris.size());
  std::vector<std::array<double, 4>> box(nt);
  for (int t = 0; t < nt; ++t) {
    box[t] = {1e300, 1e300, -1e300, -1e300};
    for (int k = 0; k < 3; ++k) {
      const Point2& p = mesh.vertex(t, k);
      box[t][0] = std::min(box[t][0], p.x);
      box[t][1] = std::min(box[t][1], p.y);
      box[t][2] = std::max(box[t][2], p.x);
      box[t][3] = std::max(box[t][3], p.y);
    }
  }
  std::vector<int> by_x(nt);
  std::iota(by_x.begin(), by_x.end(), 0);
  std::sort(by_x.begin(), by_x.end(), [&](int a, int b) { return box[a][0] < box[b][0]; });
  const double eps = 1e-12 * mesh.mesh_size() * mesh.mesh_size();

  for (int ii = 0; ii < nt; ++ii) {
    const int t = by_x[ii];
    for (int jj = ii + 1; jj < nt; ++jj) {
      const int u = by_x[jj];
      if (box[u][0] > box[t][2]) break;
      if (box[u][1] > box[t][3] || box[u][3] < box[t][1]) continue;
      const auto& vt = tris[t].v;
      const auto& vu = tris[u].v;
      int shared = 0;
      for (int a : vt)
        for (int b : vu) shared += (a == b);
      bool bad = false;
      if (shared == 3) {
        bad = true;
      } else if (shared == 2) {
        int ot = -1, ou = -1, ea = -1, eb = -1;
        for (int a : vt) {
          if (std::find(vu.begin(), vu.end(), a) == vu.end()) ot = a;
          else if (ea < 0) ea = a;
          else eb = a;
        }
        for (int b : vu)
          if (std::find(vt.begin(), vt.end(), b) == vt.end()) ou = b;
        const auto& V = mesh.vertices();
        bad = cross(V[ea], V[eb], V[ot]) * cross(V[ea], V[eb], V[ou]) >= 0;
      } else {
        for (int k = 0; k < 3 && !bad; ++k) {
          if (std::find(vt.begin(), vt.end(), vu[k]) == vt.end() &&
              mesh.barycentric(t, mesh.vertices()[vu[k]]).inside(1e-12))
            bad = true;
          if (std::find(vu.begin(), vu.end(), vt[k]) == vu.end() &&
              mesh.barycentric(u, mesh.vertices()[vt[k]]).inside(1e-12))
            bad = true;
        }
        for (int k = 0; k < 3 && !bad; ++k)
          for (int l = 0; l < 3 && !bad; ++l)
            bad = segments_cross(mesh.vertex(t, k), mesh.vertex(t, (k + 1) % 3), mesh.vertex(u, l),
                                 mesh.vertex(u, (l + 1) % 3), eps);
      }
      if (bad) offenders.insert({std::min(t, u), std::max(t, u)});
    }
  }
  rep.offending_pairs.assign(offenders.begin(), offenders.end());
  if (!rep.offending_pairs.empty())
    rep.issues.push_back(std::to_string(rep.offending_pairs.size()) + " triangle pair(s) overlap or meet improperly");
  rep.conforming = rep.offending_pairs.empty();
  return rep;
}

}  // namespace plsm
