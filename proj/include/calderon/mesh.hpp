#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "calderon/geometry.hpp"

namespace calderon {

/// Conforming triangulation of a polygonal domain with its boundary
/// vertices listed in counter-clockwise order along the boundary.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> boundary_indices;
  std::vector<int> interior_indices;
  std::vector<int> boundary_slot;  // vertex -> position in boundary_indices, -1 if interior
  std::vector<int> interior_slot;  // vertex -> position in interior_indices, -1 if on the boundary

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  std::size_t num_boundary() const { return boundary_indices.size(); }
  std::size_t num_interior() const { return interior_indices.size(); }

  double triangle_area(std::size_t t) const;
  Point centroid(std::size_t t) const;
  /// Constant gradients of the three P1 hat functions on triangle t.
  std::array<Point, 3> hat_gradients(std::size_t t) const;

  double area() const;
  double max_edge_length() const;
  double min_angle_degrees() const;
};

/// Validates orientation, boundary indexing, and fills the interior partition.
Mesh make_mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
               std::vector<int> boundary_indices);

struct MeshOptions {
  double h_max = 0.1;
  double min_angle_degrees = 25.0;
};

/// Quality conforming triangulation: every polygon corner is a vertex, every
/// triangle has diameter <= h_max and all angles >= 20 degrees.
Mesh triangulate(const geometry::PlanarDomain& domain, double h_max);
Mesh triangulate(const geometry::PlanarDomain& domain, const MeshOptions& options);

/// Friedrichs-Keller triangulation of [lo, hi] with nx by ny cells.
Mesh rectangle_mesh(const Point& lo, const Point& hi, int nx, int ny);

/// `calderon-mesh v1` text format.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

}  // namespace calderon
