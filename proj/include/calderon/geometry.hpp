#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace calderon {

using Point = Eigen::Vector2d;

namespace geometry {

enum class Generator { koch_snowflake, koch_antisnowflake, square };

inline constexpr int kMaxPrefractalLevel = 8;

struct PrefractalSpec {
  Generator generator = Generator::square;
  int level = 0;
  double scale = 1.0;
};

/// Parses `koch:<level>:<scale>`, `antikoch:<level>:<scale>` or
/// `square[:<level>[:<scale>]]`.
PrefractalSpec parse_domain_spec(const std::string& text);
std::string to_string(const PrefractalSpec& spec);

/// Counter-clockwise simple polygon together with its metric data.
struct PlanarDomain {
  std::vector<Point> vertices;
  double diam = 0.0;
  double wid = 0.0;
  double boundary_arclength = 0.0;
  double area = 0.0;

  std::size_t size() const { return vertices.size(); }
  const Point& vertex(std::size_t i) const { return vertices[i % vertices.size()]; }
};

/// Validates orientation and simplicity, then fills diam/wid/arclength/area.
PlanarDomain make_domain(std::vector<Point> vertices);

PlanarDomain generate_prefractal(const PrefractalSpec& spec);

double signed_area(std::span<const Point> polygon);
double diameter(std::span<const Point> polygon);
/// Minimal distance between two parallel supporting lines (rotating calipers).
double width(std::span<const Point> polygon);
bool is_simple(std::span<const Point> polygon);

double point_segment_distance(const Point& p, const Point& a, const Point& b);
double distance_to_boundary(const PlanarDomain& domain, const Point& p);
Point nearest_boundary_point(const PlanarDomain& domain, const Point& p);
/// Strict interior test (points on the boundary report false).
bool contains(const PlanarDomain& domain, const Point& p);
bool on_boundary(const PlanarDomain& domain, const Point& p, double tol = 1e-12);
/// Point at arclength `s` (taken modulo the perimeter) measured from vertex 0.
Point boundary_point_at(const PlanarDomain& domain, double s);

struct BoundingBox {
  Point lo;
  Point hi;
};
BoundingBox bounding_box(const PlanarDomain& domain);

/// Exterior corkscrew witness: delta * r <= d(z, boundary) <= |z - x0| < r,
/// with delta the achieved ratio d(z, boundary) / r, so the strict form holds
/// for every smaller delta.
struct CorkscrewCertificate {
  Point x0;
  double r = 0.0;
  Point z;
  double delta = 0.0;

  bool verify(const PlanarDomain& domain) const;
};

/// Grid search (33 x 33 over the ball, refined once around the best cell)
/// for the exterior point maximising min(d(z, boundary), r - |z - x0|).
CorkscrewCertificate find_corkscrew_point(const PlanarDomain& domain, const Point& x0, double r);

/// |Omega ∩ B_r(x)| / r^2, computed exactly from the polygon.
double n_set_ratio(const PlanarDomain& domain, const Point& x, double r);
/// Area of the intersection of the polygon with the disk B_r(c).
double disk_intersection_area(const PlanarDomain& domain, const Point& c, double r);

/// Smallest sampled n-set ratio over `sample_count` seeded interior points
/// and the given radii. The parallel and serial variants agree bit for bit.
double verify_n_set(const PlanarDomain& domain, int sample_count, std::span<const double> radii,
                    std::uint64_t seed = 20240611);
double verify_n_set_serial(const PlanarDomain& domain, int sample_count, std::span<const double> radii,
                           std::uint64_t seed = 20240611);

/// Deterministic seeded interior points (rejection sampling in the bounding box).
std::vector<Point> sample_interior_points(const PlanarDomain& domain, int count, std::uint64_t seed);

}  // namespace geometry
}  // namespace calderon
