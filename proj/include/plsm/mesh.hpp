#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "plsm/common.hpp"

namespace plsm {

/// Absolute tolerance on barycentric non-negativity used for point location.
inline constexpr double kInsideTolerance = 1e-10;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Triangle {
  std::array<int, 3> v{};
};

struct Barycentric {
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;

  double operator[](int k) const { return k == 0 ? b1 : (k == 1 ? b2 : b3); }
  bool inside(double tol = kInsideTolerance) const { return b1 >= -tol && b2 >= -tol && b3 >= -tol; }
};

/// Undirected edge (a < b) with the ids of its incident triangles in ascending order.
struct Edge {
  int a = 0;
  int b = 0;
  std::vector<int> triangles;

  bool interior() const { return triangles.size() == 2; }
};

struct Location {
  int triangle = -1;
  Barycentric bary;
};

struct ValidationReport {
  bool conforming = true;
  std::size_t n_vertices = 0;
  std::size_t n_triangles = 0;
  std::size_t n_boundary_edges = 0;
  std::size_t n_interior_edges = 0;
  double mesh_size = 0.0;       ///< longest edge |△|
  double max_shape_param = 0.0;  ///< max over triangles of |τ|/ρ_τ
  double min_area = 0.0;
  double total_area = 0.0;
  std::vector<std::pair<int, int>> offending_pairs;
  std::vector<std::string> issues;

  nlohmann::json to_json() const;
};

/// Immutable conforming-or-not triangulation of a planar domain.
///
/// Construction re-orients triangles counter-clockwise, builds the edge table
/// and a bucket index for point location. It rejects malformed input
/// (duplicate vertices, bad indices, zero-area triangles) but leaves
/// conformity checks to validate().
class Triangulation {
 public:
  Triangulation(std::vector<Point2> vertices, std::vector<Triangle> triangles);

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_vertices() const { return vertices_.size(); }

  const Point2& vertex(int t, int k) const { return vertices_[triangles_[t].v[k]]; }
  double area(int t) const { return areas_[t]; }
  const std::vector<double>& areas() const { return areas_; }
  double total_area() const;
  double longest_edge(int t) const;
  double inradius(int t) const;
  double shape_param(int t) const { return longest_edge(t) / inradius(t); }
  double mesh_size() const { return mesh_size_; }

  /// Index into edges() of the three edges of triangle t; edge k is opposite local vertex k.
  const std::array<int, 3>& triangle_edges(int t) const { return triangle_edges_[t]; }

  Barycentric barycentric(int t, const Point2& p) const;
  Point2 to_cartesian(int t, const Barycentric& b) const;

  /// Containing triangle with the smallest id, or nullopt outside the domain.
  std::optional<Location> locate(const Point2& p) const;

  std::array<double, 4> bounding_box() const { return {xmin_, ymin_, xmax_, ymax_}; }

  /// Stable FNV-1a digest of the (oriented) vertex and triangle arrays, hex encoded.
  std::string hash() const;

 private:
  void build_edges();
  void build_index();
  std::pair<int, int> cell_of(const Point2& p) const;

  std::vector<Point2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<double> areas_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  double mesh_size_ = 0.0;

  double xmin_ = 0, ymin_ = 0, xmax_ = 0, ymax_ = 0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

Triangulation load_mesh(std::istream& vertex_source, std::istream& triangle_source);
Triangulation load_mesh_json(std::istream& source);

/// Loads a mesh from a JSON file, from "<prefix>_vertices.csv" + "<prefix>_triangles.csv",
/// or from an explicit "vertices.csv,triangles.csv" pair.
Triangulation load_mesh(const std::string& spec);

void write_mesh_csv(const Triangulation& mesh, std::ostream& vertices, std::ostream& triangles);
nlohmann::json mesh_to_json(const Triangulation& mesh);

ValidationReport validate(const Triangulation& mesh);

}  // namespace plsm
