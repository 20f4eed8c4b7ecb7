#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "calderon/error.hpp"
#include "calderon/mesh.hpp"

namespace calderon {

double Mesh::triangle_area(std::size_t t) const {
  const auto& [a, b, c] = triangles[t];
  const Point u = vertices[b] - vertices[a];
  const Point w = vertices[c] - vertices[a];
  return 0.5 * (u.x() * w.y() - u.y() * w.x());
}

Point Mesh::centroid(std::size_t t) const {
  const auto& [a, b, c] = triangles[t];
  return (vertices[a] + vertices[b] + vertices[c]) / 3.0;
}

std::array<Point, 3> Mesh::hat_gradients(std::size_t t) const {
  const auto& tri = triangles[t];
  const double twice_area = 2.0 * triangle_area(t);
  std::array<Point, 3> g;
  for (int i = 0; i < 3; ++i) {
    const Point& p = vertices[tri[(i + 1) % 3]];
    const Point& q = vertices[tri[(i + 2) % 3]];
    // Rotate the opposite edge by -90 degrees.
    g[i] = Point(p.y() - q.y(), q.x() - p.x()) / twice_area;
  }
  return g;
}

double Mesh::area() const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) s += triangle_area(t);
  return s;
}

double Mesh::max_edge_length() const {
  double h = 0.0;
  for (const auto& tri : triangles)
    for (int i = 0; i < 3; ++i) h = std::max(h, (vertices[tri[i]] - vertices[tri[(i + 1) % 3]]).norm());
  return h;
}

double Mesh::min_angle_degrees() const {
  double best = 180.0;
  for (const auto& tri : triangles) {
    for (int i = 0; i < 3; ++i) {
      const Point u = vertices[tri[(i + 1) % 3]] - vertices[tri[i]];
      const Point w = vertices[tri[(i + 2) % 3]] - vertices[tri[i]];
      const double angle = std::atan2(std::abs(u.x() * w.y() - u.y() * w.x()), u.dot(w));
      best = std::min(best, angle * 180.0 / std::numbers::pi);
    }
  }
  return best;
}

Mesh make_mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
               std::vector<int> boundary_indices) {
  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  mesh.boundary_indices = std::move(boundary_indices);
  const int n = static_cast<int>(mesh.vertices.size());
  if (mesh.triangles.empty()) fail(ErrorKind::invariant, "mesh has no triangles");
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int v : mesh.triangles[t])
      if (v < 0 || v >= n) fail(ErrorKind::invariant, "triangle references a missing vertex");
    if (!(mesh.triangle_area(t) > 0.0)) fail(ErrorKind::invariant, "triangle is not counter-clockwise");
  }
  mesh.boundary_slot.assign(n, -1);
  for (std::size_t i = 0; i < mesh.boundary_indices.size(); ++i) {
    const int v = mesh.boundary_indices[i];
    if (v < 0 || v >= n || mesh.boundary_slot[v] >= 0)
      fail(ErrorKind::invariant, "invalid or repeated boundary index");
    mesh.boundary_slot[v] = static_cast<int>(i);
  }
  mesh.interior_slot.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    if (mesh.boundary_slot[v] >= 0) continue;
    mesh.interior_slot[v] = static_cast<int>(mesh.interior_indices.size());
    mesh.interior_indices.push_back(v);
  }
  return mesh;
}

Mesh rectangle_mesh(const Point& lo, const Point& hi, int nx, int ny) {
  require(nx >= 1 && ny >= 1, "rectangle mesh needs at least one cell per direction");
  require(hi.x() > lo.x() && hi.y() > lo.y(), "rectangle corners must be ordered");
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      vertices.emplace_back(lo.x() + (hi.x() - lo.x()) * i / nx, lo.y() + (hi.y() - lo.y()) * j / ny);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  std::vector<int> boundary;
  for (int i = 0; i < nx; ++i) boundary.push_back(id(i, 0));
  for (int j = 0; j < ny; ++j) boundary.push_back(id(nx, j));
  for (int i = nx; i > 0; --i) boundary.push_back(id(i, ny));
  for (int j = ny; j > 0; --j) boundary.push_back(id(0, j));
  return make_mesh(std::move(vertices), std::move(triangles), std::move(boundary));
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << "calderon-mesh v1\n" << std::setprecision(17);
  os << "V " << mesh.num_vertices() << '\n';
  for (const Point& p : mesh.vertices) os << p.x() << ' ' << p.y() << '\n';
  os << "T " << mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "B " << mesh.num_boundary() << '\n';
  for (int b : mesh.boundary_indices) os << b << '\n';
}

Mesh read_mesh(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("calderon-mesh v1", 0) != 0)
    fail(ErrorKind::parse, "missing `calderon-mesh v1` header");
  auto block = [&](char tag) {
    std::string word;
    long long count = -1;
    if (!(is >> word >> count) || word.size() != 1 || word[0] != tag || count < 0)
      fail(ErrorKind::parse, std::string("expected block ") + tag);
    return static_cast<std::size_t>(count);
  };
  std::vector<Point> vertices(block('V'));
  for (Point& p : vertices)
    if (!(is >> p.x() >> p.y())) fail(ErrorKind::parse, "truncated vertex block");
  std::vector<std::array<int, 3>> triangles(block('T'));
  for (auto& t : triangles)
    if (!(is >> t[0] >> t[1] >> t[2])) fail(ErrorKind::parse, "truncated triangle block");
  std::vector<int> boundary(block('B'));
  for (int& b : boundary)
    if (!(is >> b)) fail(ErrorKind::parse, "truncated boundary block");
  return make_mesh(std::move(vertices), std::move(triangles), std::move(boundary));
}

}  // namespace calderon
