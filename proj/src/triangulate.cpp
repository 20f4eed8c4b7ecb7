// Constrained Delaunay refinement (Ruppert) over a simple polygon.
//
// Triangles store neighbours opposite each vertex: nb[i] shares the edge
// (v[i+1], v[i+2]). Segments carry a `fixed` flag on both sides.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <string>

#include "calderon/error.hpp"
#include "calderon/mesh.hpp"

namespace calderon {
namespace {

double orient(const Point& a, const Point& b, const Point& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

double incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
  const double adx = a.x() - d.x(), ady = a.y() - d.y();
  const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
  const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return ad * (bdx * cdy - cdx * bdy) + bd * (cdx * ady - adx * cdy) + cd * (adx * bdy - bdx * ady);
}

Point circumcenter(const Point& a, const Point& b, const Point& c) {
  const Point ba = b - a, ca = c - a;
  const double d = 2.0 * (ba.x() * ca.y() - ba.y() * ca.x());
  const double b2 = ba.squaredNorm(), c2 = ca.squaredNorm();
  return a + Point((ca.y() * b2 - ba.y() * c2) / d, (ba.x() * c2 - ca.x() * b2) / d);
}

bool encroaches(const Point& a, const Point& b, const Point& p) { return (p - a).dot(p - b) < 0.0; }

constexpr int next3(int i) { return i == 2 ? 0 : i + 1; }
constexpr int prev3(int i) { return i == 0 ? 2 : i - 1; }

struct Tri {
  std::array<int, 3> v{};
  std::array<int, 3> nb{-1, -1, -1};
  std::array<bool, 3> fixed{false, false, false};
  bool alive = true;
  bool inside = false;
};

struct Hit {
  int tri = -1;
  int edge = -1;  // >= 0 when the walk stopped at a fixed edge
};

class Refiner {
 public:
  Refiner(const geometry::PlanarDomain& domain, const MeshOptions& options)
      : domain_(domain), h_max_(options.h_max) {
    min_angle_ = options.min_angle_degrees * std::numbers::pi / 180.0;
  }

  Mesh run();

 private:
  const geometry::PlanarDomain& domain_;
  double h_max_;
  double min_angle_;
  std::vector<Point> pts_;
  std::vector<Tri> tris_;
  std::vector<int> free_;
  std::vector<int> vert_tri_;
  std::vector<int> next_b_;
  std::deque<int> bad_queue_;
  std::deque<std::pair<int, int>> seg_queue_;
  std::size_t vertex_cap_ = 0;
  bool refining_ = false;

  int add_point(const Point& p) {
    if (pts_.size() >= vertex_cap_)
      fail(ErrorKind::meshing, "refinement exceeded " + std::to_string(vertex_cap_) + " vertices");
    pts_.push_back(p);
    vert_tri_.push_back(-1);
    next_b_.push_back(-1);
    return static_cast<int>(pts_.size()) - 1;
  }

  int new_tri() {
    if (!free_.empty()) {
      const int t = free_.back();
      free_.pop_back();
      tris_[t] = Tri{};
      return t;
    }
    tris_.emplace_back();
    return static_cast<int>(tris_.size()) - 1;
  }

  Hit locate(const Point& p, int start, bool respect_fixed) const;
  int brute_locate(const Point& p) const;
  void insert(const Point& p, int start, int s0, int s1);
  std::pair<int, int> find_edge(int a, int b) const;
  void split_segment(int a, int b);
  bool is_segment(int a, int b) const { return next_b_[a] == b || next_b_[b] == a; }
  bool is_bad(int t) const;
  void check_encroachment(int t);
  void mark_segment(int a, int b, bool value);
};

Hit Refiner::locate(const Point& p, int start, bool respect_fixed) const {
  int t = start;
  const std::size_t cap = 4 * tris_.size() + 64;
  for (std::size_t step = 0; step < cap; ++step) {
    const Tri& tri = tris_[t];
    int fixed_exit = -1, free_exit = -1;
    for (int j = 0; j < 3; ++j) {
      const int k = static_cast<int>((j + step) % 3);
      const Point& a = pts_[tri.v[next3(k)]];
      const Point& b = pts_[tri.v[prev3(k)]];
      if (orient(a, b, p) < -1e-13 * (b - a).norm() * ((p - a).norm() + (p - b).norm())) {
        if (respect_fixed && tri.fixed[k]) {
          if (fixed_exit < 0) fixed_exit = k;
        } else if (free_exit < 0) {
          free_exit = k;
        }
      }
    }
    if (free_exit < 0 && fixed_exit < 0) return {t, -1};
    if (free_exit < 0) return {t, fixed_exit};
    t = tri.nb[free_exit];
    if (t < 0) fail(ErrorKind::meshing, "point location left the triangulation");
  }
  if (respect_fixed) fail(ErrorKind::meshing, "point location did not terminate");
  return {brute_locate(p), -1};
}

int Refiner::brute_locate(const Point& p) const {
  // Triangle whose worst scaled edge orientation is largest.
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    const Tri& tri = tris_[t];
    if (!tri.alive) continue;
    double score = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      const Point& a = pts_[tri.v[next3(k)]];
      const Point& b = pts_[tri.v[prev3(k)]];
      score = std::min(score, orient(a, b, p) / std::max((b - a).squaredNorm(), 1e-300));
    }
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(t);
    }
  }
  if (best < 0 || best_score < -1e-9) fail(ErrorKind::meshing, "point outside the enclosing triangle");
  return best;
}

// Bowyer-Watson insertion. When (s0, s1) is given the point lies on that
// segment and both incident triangles seed the cavity.
void Refiner::insert(const Point& p, int start, int s0, int s1) {
  const bool splitting = s0 >= 0;
  std::vector<int> seeds{start};
  if (splitting) {
    const auto [t, k] = find_edge(s0, s1);
    seeds = {t, tris_[t].nb[k]};
  }
  auto crosses = [&](int t, int k) {
    const Tri& tri = tris_[t];
    if (!tri.fixed[k]) return true;
    if (!splitting) return false;
    const int a = tri.v[next3(k)], b = tri.v[prev3(k)];
    return (a == s0 && b == s1) || (a == s1 && b == s0);
  };

  std::vector<int> cavity;
  std::vector<int> excluded;
  std::vector<char> in_cavity;
  for (;;) {
    // Grow the cavity from the seeds, skipping triangles excluded by the
    // star-shape repair.
    cavity.clear();
    in_cavity.assign(tris_.size(), 0);
    for (int e : excluded) in_cavity[e] = 2;
    for (int s : seeds) {
      if (in_cavity[s] == 2) fail(ErrorKind::meshing, "degenerate insertion at a seed triangle");
      in_cavity[s] = 1;
      cavity.push_back(s);
    }
    for (std::size_t i = 0; i < cavity.size(); ++i) {
      const int c = cavity[i];
      for (int k = 0; k < 3; ++k) {
        const int n = tris_[c].nb[k];
        if (n < 0 || in_cavity[n] != 0 || !crosses(c, k)) continue;
        const Tri& nt = tris_[n];
        if (incircle(pts_[nt.v[0]], pts_[nt.v[1]], pts_[nt.v[2]], p) > 0.0) {
          in_cavity[n] = 1;
          cavity.push_back(n);
        }
      }
    }
    // Every boundary edge must see p strictly on its left.
    int offender = -1;
    for (int c : cavity) {
      for (int k = 0; k < 3 && offender < 0; ++k) {
        const int n = tris_[c].nb[k];
        const bool internal = n >= 0 && in_cavity[n] == 1 && crosses(c, k);
        if (internal) continue;
        const Point& a = pts_[tris_[c].v[next3(k)]];
        const Point& b = pts_[tris_[c].v[prev3(k)]];
        const double scale = (b - a).norm() * std::max((p - a).norm(), (p - b).norm());
        if (orient(a, b, p) <= 1e-12 * scale) offender = c;
      }
      if (offender >= 0) break;
    }
    if (offender < 0) break;
    if (std::find(seeds.begin(), seeds.end(), offender) != seeds.end())
      fail(ErrorKind::meshing, "point coincides with an existing edge");
    excluded.push_back(offender);
  }

  struct BoundaryEdge {
    int a, b, outer;
    bool fixed;
    bool inside;
  };
  std::vector<BoundaryEdge> boundary;
  std::vector<int> cavity_vertices;
  for (int c : cavity) {
    const Tri& tri = tris_[c];
    for (int k = 0; k < 3; ++k) {
      cavity_vertices.push_back(tri.v[k]);
      const int n = tri.nb[k];
      if (n >= 0 && in_cavity[n] == 1 && crosses(c, k)) continue;
      boundary.push_back({tri.v[next3(k)], tri.v[prev3(k)], n, tri.fixed[k], tri.inside});
    }
  }
  const int pi = add_point(p);
  for (int c : cavity) {
    tris_[c].alive = false;
    free_.push_back(c);
  }
  std::vector<int> created;
  created.reserve(boundary.size());
  for (const BoundaryEdge& e : boundary) {
    const int t = new_tri();
    Tri& tri = tris_[t];
    tri.v = {pi, e.a, e.b};
    tri.nb[0] = e.outer;
    tri.fixed[0] = e.fixed;
    tri.fixed[2] = splitting && (e.a == s0 || e.a == s1);
    tri.fixed[1] = splitting && (e.b == s0 || e.b == s1);
    tri.inside = e.inside;
    if (e.outer >= 0) {
      Tri& o = tris_[e.outer];
      for (int k = 0; k < 3; ++k)
        if (o.v[next3(k)] == e.b && o.v[prev3(k)] == e.a) o.nb[k] = t;
    }
    created.push_back(t);
  }
  // Fan adjacency: edge (p, a) of one triangle pairs with edge (a, p) of another.
  for (int t : created) {
    Tri& tri = tris_[t];
    for (int u : created) {
      if (tris_[u].v[2] == tri.v[1]) tri.nb[2] = u;
      if (tris_[u].v[1] == tri.v[2]) tri.nb[1] = u;
    }
    for (int k = 0; k < 3; ++k) vert_tri_[tri.v[k]] = t;
  }
  for (int v : cavity_vertices)
    if (vert_tri_[v] >= 0 && !tris_[vert_tri_[v]].alive) fail(ErrorKind::meshing, "vertex swallowed by cavity");

  if (splitting) {
    if (next_b_[s0] == s1) {
      next_b_[s0] = pi;
      next_b_[pi] = s1;
    } else {
      next_b_[s1] = pi;
      next_b_[pi] = s0;
    }
  }
  if (refining_) {
    for (int t : created) {
      if (!tris_[t].inside) continue;
      bad_queue_.push_back(t);
      check_encroachment(t);
    }
  }
}

std::pair<int, int> Refiner::find_edge(int a, int b) const {
  const int start = vert_tri_[a];
  int t = start;
  for (std::size_t guard = 0; guard < 4096; ++guard) {
    const Tri& tri = tris_[t];
    int i = 0;
    while (tri.v[i] != a) ++i;
    if (tri.v[next3(i)] == b) return {t, prev3(i)};
    if (tri.v[prev3(i)] == b) return {t, next3(i)};
    t = tri.nb[prev3(i)];
    if (t < 0 || t == start) break;
  }
  return {-1, -1};
}

void Refiner::mark_segment(int a, int b, bool value) {
  const auto [t, k] = find_edge(a, b);
  if (t < 0) fail(ErrorKind::meshing, "segment missing from triangulation");
  tris_[t].fixed[k] = value;
  const int n = tris_[t].nb[k];
  for (int j = 0; j < 3; ++j)
    if (tris_[n].nb[j] == t) tris_[n].fixed[j] = value;
}

void Refiner::split_segment(int a, int b) {
  const auto [t, k] = find_edge(a, b);
  if (t < 0) fail(ErrorKind::meshing, "segment missing from triangulation");
  insert(0.5 * (pts_[a] + pts_[b]), t, a, b);
}

bool Refiner::is_bad(int t) const {
  const Tri& tri = tris_[t];
  const Point& a = pts_[tri.v[0]];
  const Point& b = pts_[tri.v[1]];
  const Point& c = pts_[tri.v[2]];
  const double la = (b - c).squaredNorm(), lb = (c - a).squaredNorm(), lc = (a - b).squaredNorm();
  const double longest = std::max({la, lb, lc});
  if (longest > h_max_ * h_max_) return true;
  // Smallest angle sits opposite the shortest edge.
  const double shortest = std::min({la, lb, lc});
  const double area2 = std::abs(orient(a, b, c));
  const double product = std::sqrt(la * lb * lc / shortest);
  const double sin_min = area2 / product;
  return sin_min < std::sin(min_angle_);
}

void Refiner::check_encroachment(int t) {
  const Tri& tri = tris_[t];
  for (int k = 0; k < 3; ++k) {
    if (!tri.fixed[k]) continue;
    const int a = tri.v[next3(k)], b = tri.v[prev3(k)];
    if (encroaches(pts_[a], pts_[b], pts_[tri.v[k]])) seg_queue_.emplace_back(a, b);
  }
}

Mesh Refiner::run() {
  const auto box = geometry::bounding_box(domain_);
  const Point centre = 0.5 * (box.lo + box.hi);
  const double extent = std::max(box.hi.x() - box.lo.x(), box.hi.y() - box.lo.y());
  const double expected = domain_.area / (0.25 * h_max_ * h_max_) + 4.0 * domain_.boundary_arclength / h_max_;
  vertex_cap_ = static_cast<std::size_t>(64.0 * expected) + 1024;

  const double m = 40.0 * extent;
  pts_ = {centre + Point(-m, -m), centre + Point(m, -m), centre + Point(0.0, m)};
  vert_tri_ = {0, 0, 0};
  next_b_ = {-1, -1, -1};
  tris_.emplace_back();
  tris_[0].v = {0, 1, 2};

  // Boundary points, evenly spaced along each polygon edge.
  const int first = static_cast<int>(pts_.size());
  int last_tri = 0;
  int previous = -1;
  const std::size_t nv = domain_.size();
  for (std::size_t i = 0; i < nv; ++i) {
    const Point& a = domain_.vertex(i);
    const Point& b = domain_.vertex(i + 1);
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a).norm() / (0.8 * h_max_))));
    for (int j = 0; j < pieces; ++j) {
      const Point p = a + (b - a) * (static_cast<double>(j) / pieces);
      const Hit hit = locate(p, last_tri, false);
      insert(p, hit.tri, -1, -1);
      const int id = static_cast<int>(pts_.size()) - 1;
      last_tri = vert_tri_[id];
      if (previous >= 0) next_b_[previous] = id;
      previous = id;
    }
  }
  next_b_[previous] = first;

  // Recover every boundary segment by midpoint insertion.
  std::vector<std::pair<int, int>> pending;
  for (int a = first; a < static_cast<int>(pts_.size()); ++a) pending.emplace_back(a, next_b_[a]);
  std::vector<std::pair<int, int>> segments;
  while (!pending.empty()) {
    const auto [a, b] = pending.back();
    pending.pop_back();
    if (find_edge(a, b).first >= 0) {
      segments.emplace_back(a, b);
      continue;
    }
    const Point mid = 0.5 * (pts_[a] + pts_[b]);
    insert(mid, locate(mid, vert_tri_[a], false).tri, -1, -1);
    const int id = static_cast<int>(pts_.size()) - 1;
    next_b_[a] = id;
    next_b_[id] = b;
    pending.emplace_back(a, id);
    pending.emplace_back(id, b);
  }
  for (const auto& [a, b] : segments) mark_segment(a, b, true);

  // Flood fill the exterior from the enclosing triangle's corners.
  for (Tri& t : tris_) t.inside = t.alive;
  std::vector<int> stack;
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    const Tri& tri = tris_[t];
    if (tri.alive && (tri.v[0] < 3 || tri.v[1] < 3 || tri.v[2] < 3)) {
      tris_[t].inside = false;
      stack.push_back(static_cast<int>(t));
    }
  }
  while (!stack.empty()) {
    const int t = stack.back();
    stack.pop_back();
    for (int k = 0; k < 3; ++k) {
      const int n = tris_[t].nb[k];
      if (n < 0 || tris_[t].fixed[k] || !tris_[n].inside) continue;
      tris_[n].inside = false;
      stack.push_back(n);
    }
  }

  refining_ = true;
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    if (!tris_[t].alive || !tris_[t].inside) continue;
    bad_queue_.push_back(static_cast<int>(t));
    check_encroachment(static_cast<int>(t));
  }
  for (;;) {
    if (!seg_queue_.empty()) {
      const auto [a, b] = seg_queue_.front();
      seg_queue_.pop_front();
      if (is_segment(a, b)) split_segment(a, b);
      continue;
    }
    if (bad_queue_.empty()) break;
    const int t = bad_queue_.front();
    bad_queue_.pop_front();
    if (!tris_[t].alive || !tris_[t].inside || !is_bad(t)) continue;
    const Tri& tri = tris_[t];
    const Point c = circumcenter(pts_[tri.v[0]], pts_[tri.v[1]], pts_[tri.v[2]]);
    const Hit hit = locate(c, t, true);
    if (hit.edge >= 0) {
      const Tri& h = tris_[hit.tri];
      seg_queue_.emplace_back(h.v[next3(hit.edge)], h.v[prev3(hit.edge)]);
      bad_queue_.push_back(t);
      continue;
    }
    // Segments on the cavity rim that the circumcentre encroaches get split instead.
    bool deferred = false;
    {
      std::vector<int> cavity{hit.tri};
      std::vector<int> seen{hit.tri};
      for (std::size_t i = 0; i < cavity.size(); ++i) {
        const Tri& ct = tris_[cavity[i]];
        for (int k = 0; k < 3; ++k) {
          const int a = ct.v[next3(k)], b = ct.v[prev3(k)];
          if (ct.fixed[k]) {
            if (encroaches(pts_[a], pts_[b], c)) {
              seg_queue_.emplace_back(a, b);
              deferred = true;
            }
            continue;
          }
          const int n = ct.nb[k];
          if (n < 0 || std::find(seen.begin(), seen.end(), n) != seen.end()) continue;
          const Tri& nt = tris_[n];
          if (incircle(pts_[nt.v[0]], pts_[nt.v[1]], pts_[nt.v[2]], c) > 0.0) {
            seen.push_back(n);
            cavity.push_back(n);
          }
        }
      }
    }
    if (deferred) {
      bad_queue_.push_back(t);
      continue;
    }
    insert(c, hit.tri, -1, -1);
  }

  // Compact to the interior triangles.
  std::vector<int> remap(pts_.size(), -1);
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  auto index_of = [&](int v) {
    if (remap[v] < 0) {
      remap[v] = static_cast<int>(vertices.size());
      vertices.push_back(pts_[v]);
    }
    return remap[v];
  };
  std::vector<int> boundary;
  int v = first;
  do {
    boundary.push_back(index_of(v));
    v = next_b_[v];
  } while (v != first);
  for (const Tri& t : tris_) {
    if (!t.alive || !t.inside) continue;
    triangles.push_back({index_of(t.v[0]), index_of(t.v[1]), index_of(t.v[2])});
  }
  return make_mesh(std::move(vertices), std::move(triangles), std::move(boundary));
}

}  // namespace

Mesh triangulate(const geometry::PlanarDomain& domain, double h_max) {
  MeshOptions options;
  options.h_max = h_max;
  return triangulate(domain, options);
}

Mesh triangulate(const geometry::PlanarDomain& domain, const MeshOptions& options) {
  if (!(options.h_max > 0.0)) fail(ErrorKind::precondition, "h_max must be positive");
  if (!(options.h_max < domain.wid / 4.0))
    fail(ErrorKind::precondition, "h_max must be below wid/4 = " + std::to_string(domain.wid / 4.0));
  if (!(options.min_angle_degrees >= 20.0 && options.min_angle_degrees <= 30.0))
    fail(ErrorKind::precondition, "minimum angle must lie in [20, 30] degrees");
  Refiner refiner(domain, options);
  Mesh mesh = refiner.run();
  if (mesh.min_angle_degrees() < 20.0)
    fail(ErrorKind::meshing, "minimum angle " + std::to_string(mesh.min_angle_degrees()) + " below 20 degrees");
  if (mesh.max_edge_length() > options.h_max * (1.0 + 1e-12))
    fail(ErrorKind::meshing, "triangle diameter exceeds h_max");
  return mesh;
}

}  // namespace calderon
