#include "calderon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

#include "calderon/error.hpp"
#include "calderon/parallel.hpp"

namespace calderon::geometry {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double orient(const Point& a, const Point& b, const Point& c) { return cross(b - a, c - a); }

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double o1 = orient(a, b, c);
  const double o2 = orient(a, b, d);
  const double o3 = orient(c, d, a);
  const double o4 = orient(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

std::vector<Point> convex_hull(std::span<const Point> pts) {
  std::vector<Point> p(pts.begin(), pts.end());
  std::sort(p.begin(), p.end(), [](const Point& a, const Point& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  std::vector<Point> hull(2 * p.size());
  std::size_t k = 0;
  for (const auto& q : p) {
    while (k >= 2 && orient(hull[k - 2], hull[k - 1], q) <= 0) --k;
    hull[k++] = q;
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && orient(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<Point> koch_step(const std::vector<Point>& poly, double sign) {
  std::vector<Point> out;
  out.reserve(poly.size() * 4);
  const double bump = std::sqrt(3.0) / 6.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    const Point d = b - a;
    const Point outward(d.y(), -d.x());
    out.push_back(a);
    out.push_back(a + d / 3.0);
    out.push_back(a + d / 2.0 + sign * bump * outward);
    out.push_back(a + 2.0 * d / 3.0);
  }
  return out;
}

// Signed area of triangle (0, a, b) intersected with the disk of radius r
// centred at the origin.
double triangle_disk_area(const Point& a, const Point& b, double r) {
  auto sector = [r](const Point& u, const Point& v) {
    return 0.5 * r * r * std::atan2(cross(u, v), u.dot(v));
  };
  const Point d = b - a;
  const double qa = d.squaredNorm();
  if (qa == 0.0) return 0.0;
  const double qb = a.dot(d);
  const double qc = a.squaredNorm() - r * r;
  const double disc = qb * qb - qa * qc;
  if (disc <= 0.0) return sector(a, b);
  const double s = std::sqrt(disc);
  const double t1 = (-qb - s) / qa;
  const double t2 = (-qb + s) / qa;
  if (t2 <= 0.0 || t1 >= 1.0) return sector(a, b);
  if (t1 <= 0.0 && t2 >= 1.0) return 0.5 * cross(a, b);
  const Point p1 = a + std::max(t1, 0.0) * d;
  const Point p2 = a + std::min(t2, 1.0) * d;
  double area = 0.5 * cross(p1, p2);
  if (t1 > 0.0) area += sector(a, p1);
  if (t2 < 1.0) area += sector(p2, b);
  return area;
}

}  // namespace

PrefractalSpec parse_domain_spec(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.empty()) fail(ErrorKind::config, "empty domain specification");
  PrefractalSpec spec;
  if (parts[0] == "koch") {
    spec.generator = Generator::koch_snowflake;
  } else if (parts[0] == "antikoch") {
    spec.generator = Generator::koch_antisnowflake;
  } else if (parts[0] == "square") {
    spec.generator = Generator::square;
  } else {
    fail(ErrorKind::config, "unknown domain generator '" + parts[0] + "'");
  }
  try {
    if (parts.size() > 1) spec.level = std::stoi(parts[1]);
    if (parts.size() > 2) spec.scale = std::stod(parts[2]);
  } catch (const std::exception&) {
    fail(ErrorKind::config, "malformed domain specification '" + text + "'");
  }
  if (parts.size() > 3) fail(ErrorKind::config, "malformed domain specification '" + text + "'");
  return spec;
}

std::string to_string(const PrefractalSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  switch (spec.generator) {
    case Generator::koch_snowflake: os << "koch"; break;
    case Generator::koch_antisnowflake: os << "antikoch"; break;
    case Generator::square: os << "square"; break;
  }
  os << ':' << spec.level << ':' << spec.scale;
  return os.str();
}

double signed_area(std::span<const Point> polygon) {
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i)
    twice += cross(polygon[i], polygon[(i + 1) % polygon.size()]);
  return 0.5 * twice;
}

double diameter(std::span<const Point> polygon) {
  const auto hull = convex_hull(polygon);
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) best = std::max(best, (hull[i] - hull[j]).norm());
  return best;
}

double width(std::span<const Point> polygon) {
  const auto hull = convex_hull(polygon);
  const std::size_t m = hull.size();
  if (m < 3) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t j = 1;
  for (std::size_t i = 0; i < m; ++i) {
    const Point& a = hull[i];
    const Point& b = hull[(i + 1) % m];
    const Point e = b - a;
    while (cross(e, hull[(j + 1) % m] - a) > cross(e, hull[j] - a)) j = (j + 1) % m;
    best = std::min(best, cross(e, hull[j] - a) / e.norm());
  }
  return best;
}

bool is_simple(std::span<const Point> polygon) {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  double max_edge = 0.0;
  Point lo = polygon[0], hi = polygon[0];
  for (std::size_t i = 0; i < n; ++i) {
    max_edge = std::max(max_edge, (polygon[(i + 1) % n] - polygon[i]).norm());
    lo = lo.cwiseMin(polygon[i]);
    hi = hi.cwiseMax(polygon[i]);
  }
  if (max_edge == 0.0) return false;
  // Adjacent edges may only meet at their shared vertex.
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % n];
    const Point& c = polygon[(i + 2) % n];
    if (a == b) return false;
    if (orient(a, b, c) == 0.0 && (b - a).dot(c - b) < 0.0) return false;
  }
  // Uniform bucket grid keeps the non-adjacent pair test near linear.
  const double cell = max_edge;
  const auto nx = static_cast<long>(std::floor((hi.x() - lo.x()) / cell)) + 1;
  std::unordered_map<long, std::vector<std::size_t>> buckets;
  auto key = [&](long ix, long iy) { return iy * nx + ix; };
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % n];
    const long x0 = static_cast<long>(std::floor((std::min(a.x(), b.x()) - lo.x()) / cell));
    const long x1 = static_cast<long>(std::floor((std::max(a.x(), b.x()) - lo.x()) / cell));
    const long y0 = static_cast<long>(std::floor((std::min(a.y(), b.y()) - lo.y()) / cell));
    const long y1 = static_cast<long>(std::floor((std::max(a.y(), b.y()) - lo.y()) / cell));
    for (long iy = y0; iy <= y1; ++iy)
      for (long ix = x0; ix <= x1; ++ix) buckets[key(ix, iy)].push_back(i);
  }
  for (const auto& [k, edges] : buckets) {
    for (std::size_t p = 0; p < edges.size(); ++p) {
      for (std::size_t q = p + 1; q < edges.size(); ++q) {
        const std::size_t i = edges[p], j = edges[q];
        const bool adjacent = (i + 1) % n == j || (j + 1) % n == i;
        if (adjacent) continue;
        if (segments_intersect(polygon[i], polygon[(i + 1) % n], polygon[j], polygon[(j + 1) % n]))
          return false;
      }
    }
  }
  return true;
}

PlanarDomain make_domain(std::vector<Point> vertices) {
  if (vertices.size() < 3) fail(ErrorKind::geometry, "a polygon needs at least three vertices");
  PlanarDomain d;
  d.area = signed_area(vertices);
  if (!(d.area > 0.0)) fail(ErrorKind::geometry, "polygon must be counter-clockwise with positive area");
  if (!is_simple(vertices)) fail(ErrorKind::geometry, "polygon is not simple");
  d.diam = diameter(vertices);
  d.wid = width(vertices);
  for (std::size_t i = 0; i < vertices.size(); ++i)
    d.boundary_arclength += (vertices[(i + 1) % vertices.size()] - vertices[i]).norm();
  d.vertices = std::move(vertices);
  return d;
}

PlanarDomain generate_prefractal(const PrefractalSpec& spec) {
  if (!(spec.scale > 0.0) || !std::isfinite(spec.scale)) fail(ErrorKind::precondition, "scale must be positive");
  if (spec.level < 0) fail(ErrorKind::precondition, "level must be non-negative");
  if (spec.level > kMaxPrefractalLevel)
    fail(ErrorKind::size_limit, "prefractal level " + std::to_string(spec.level) + " exceeds the cap of " +
                                    std::to_string(kMaxPrefractalLevel));
  const double s = spec.scale;
  std::vector<Point> poly;
  double sign = 1.0;
  switch (spec.generator) {
    case Generator::square:
      poly = {Point(0, 0), Point(s, 0), Point(s, s), Point(0, s)};
      break;
    case Generator::koch_antisnowflake:
      // Inward bumps on a triangle meet at the centroid; a hexagon keeps them apart.
      sign = -1.0;
      for (int i = 0; i < 6; ++i) {
        const double a = std::numbers::pi / 3.0 * i;
        poly.emplace_back(s * (1.0 + std::cos(a)), s * (0.5 * std::sqrt(3.0) + std::sin(a)));
      }
      break;
    case Generator::koch_snowflake:
      poly = {Point(0, 0), Point(s, 0), Point(0.5 * s, 0.5 * std::sqrt(3.0) * s)};
      break;
  }
  for (int k = 0; k < spec.level; ++k) poly = koch_step(poly, sign);
  return make_domain(std::move(poly));
}

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point d = b - a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

double distance_to_boundary(const PlanarDomain& domain, const Point& p) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = domain.size();
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best, point_segment_distance(p, domain.vertices[i], domain.vertex(i + 1)));
  return best;
}

Point nearest_boundary_point(const PlanarDomain& domain, const Point& p) {
  double best = std::numeric_limits<double>::infinity();
  Point out = domain.vertices.front();
  const std::size_t n = domain.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = domain.vertices[i];
    const Point d = domain.vertex(i + 1) - a;
    const double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
    const Point q = a + t * d;
    const double dist = (p - q).norm();
    if (dist < best) {
      best = dist;
      out = q;
    }
  }
  return out;
}

bool on_boundary(const PlanarDomain& domain, const Point& p, double tol) {
  return distance_to_boundary(domain, p) <= tol;
}

bool contains(const PlanarDomain& domain, const Point& p) {
  const std::size_t n = domain.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = domain.vertices[i];
    const Point& b = domain.vertices[j];
    if (point_segment_distance(p, a, b) == 0.0) return false;
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double xc = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < xc) inside = !inside;
    }
  }
  return inside;
}

Point boundary_point_at(const PlanarDomain& domain, double s) {
  s = std::fmod(s, domain.boundary_arclength);
  if (s < 0) s += domain.boundary_arclength;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const Point& a = domain.vertices[i];
    const Point& b = domain.vertex(i + 1);
    const double len = (b - a).norm();
    if (s <= len) return a + (s / len) * (b - a);
    s -= len;
  }
  return domain.vertices.front();
}

BoundingBox bounding_box(const PlanarDomain& domain) {
  BoundingBox box{domain.vertices.front(), domain.vertices.front()};
  for (const auto& v : domain.vertices) {
    box.lo = box.lo.cwiseMin(v);
    box.hi = box.hi.cwiseMax(v);
  }
  return box;
}

bool CorkscrewCertificate::verify(const PlanarDomain& domain) const {
  const double d = distance_to_boundary(domain, z);
  const double dist = (z - x0).norm();
  // Rounding slack: x0 may sit an ulp off the polygon and delta is stored as d / r.
  const double tol = 1e-12 * std::max(1.0, domain.diam);
  return !contains(domain, z) && d > 0.0 && delta > 0.0 && delta * r <= d + tol && d <= dist + tol && dist < r;
}

CorkscrewCertificate find_corkscrew_point(const PlanarDomain& domain, const Point& x0, double r) {
  const double tol = 1e-12 * std::max(1.0, domain.diam);
  if (!(r > 0.0) || !(r < 0.5 * domain.diam))
    fail(ErrorKind::precondition, "corkscrew radius must lie in (0, diam/2)");
  if (distance_to_boundary(domain, x0) > tol) fail(ErrorKind::precondition, "x0 is not on the boundary");

  constexpr int kGrid = 33;
  auto objective = [&](const Point& z) {
    const double dist = (z - x0).norm();
    if (!(dist < r) || contains(domain, z)) return -1.0;
    return std::min(distance_to_boundary(domain, z), r - dist);
  };
  auto search = [&](const Point& centre, double half, Point& best, double& best_value) {
    const double step = 2.0 * half / (kGrid - 1);
    for (int j = 0; j < kGrid; ++j) {
      for (int i = 0; i < kGrid; ++i) {
        const Point z(centre.x() - half + i * step, centre.y() - half + j * step);
        const double v = objective(z);
        if (v > best_value) {
          best_value = v;
          best = z;
        }
      }
    }
  };
  Point best = x0;
  double best_value = 0.0;
  search(x0, r, best, best_value);
  if (best_value > 0.0) search(best, 2.0 * r / (kGrid - 1), best, best_value);

  CorkscrewCertificate cert{x0, r, best, 0.0};
  const double d = distance_to_boundary(domain, best);
  if (!(best_value > 0.0) || d <= 1e-3 * r)
    fail(ErrorKind::corkscrew, "no exterior corkscrew point found near the given boundary point");
  cert.delta = d / r;
  if (!cert.verify(domain)) fail(ErrorKind::corkscrew, "corkscrew certificate failed verification");
  return cert;
}

double disk_intersection_area(const PlanarDomain& domain, const Point& c, double r) {
  double area = 0.0;
  const std::size_t n = domain.size();
  for (std::size_t i = 0; i < n; ++i)
    area += triangle_disk_area(domain.vertices[i] - c, domain.vertex(i + 1) - c, r);
  return area;
}

double n_set_ratio(const PlanarDomain& domain, const Point& x, double r) {
  return disk_intersection_area(domain, x, r) / (r * r);
}

std::vector<Point> sample_interior_points(const PlanarDomain& domain, int count, std::uint64_t seed) {
  const auto box = bounding_box(domain);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(box.lo.x(), box.hi.x());
  std::uniform_real_distribution<double> uy(box.lo.y(), box.hi.y());
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    const double px = ux(rng);
    const double py = uy(rng);
    const Point p(px, py);
    if (contains(domain, p)) out.push_back(p);
  }
  return out;
}

namespace {
void check_n_set_args(int sample_count, std::span<const double> radii) {
  if (sample_count < 1) fail(ErrorKind::precondition, "sample_count must be at least 1");
  if (radii.empty()) fail(ErrorKind::precondition, "radii must be non-empty");
  for (double r : radii)
    if (!(r > 0.0 && r <= 1.0)) fail(ErrorKind::precondition, "radii must lie in (0, 1]");
}
}  // namespace

double verify_n_set_serial(const PlanarDomain& domain, int sample_count, std::span<const double> radii,
                           std::uint64_t seed) {
  check_n_set_args(sample_count, radii);
  const auto points = sample_interior_points(domain, sample_count, seed);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : points)
    for (double r : radii) best = std::min(best, n_set_ratio(domain, p, r));
  return best;
}

double verify_n_set(const PlanarDomain& domain, int sample_count, std::span<const double> radii,
                    std::uint64_t seed) {
  check_n_set_args(sample_count, radii);
  const auto points = sample_interior_points(domain, sample_count, seed);
  std::vector<double> per_point(points.size(), std::numeric_limits<double>::infinity());
  const auto n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    double m = std::numeric_limits<double>::infinity();
    for (double r : radii) m = std::min(m, n_set_ratio(domain, points[static_cast<std::size_t>(i)], r));
    per_point[static_cast<std::size_t>(i)] = m;
  }
  return *std::min_element(per_point.begin(), per_point.end());
}

}  // namespace calderon::geometry
