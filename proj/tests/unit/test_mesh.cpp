#include <algorithm>
#include <cmath>
#include <sstream>

#include <doctest.h>

#include "calderon/error.hpp"
#include "calderon/geometry.hpp"
#include "calderon/mesh.hpp"

using namespace calderon;
using namespace calderon::geometry;

TEST_CASE("rectangle mesh counts") {
  const auto m = rectangle_mesh(Point(0, 0), Point(2, 1), 4, 3);
  CHECK(m.num_vertices() == 20);
  CHECK(m.num_triangles() == 24);
  CHECK(m.num_boundary() == 14);
  CHECK(m.num_interior() == 6);
  CHECK(m.area() == doctest::Approx(2.0));
  CHECK(m.min_angle_degrees() == doctest::Approx(std::atan((1.0 / 3.0) / 0.5) * 180.0 / std::acos(-1.0)));
}

TEST_CASE("hat gradients sum to zero and reproduce linear functions") {
  const auto m = rectangle_mesh(Point(0, 0), Point(1, 1), 3, 3);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto g = m.hat_gradients(t);
    CHECK((g[0] + g[1] + g[2]).norm() < 1e-12);
    Point grad = Point::Zero();
    for (int k = 0; k < 3; ++k) grad += (2.0 * m.vertices[m.triangles[t][k]].x() - m.vertices[m.triangles[t][k]].y()) * g[k];
    CHECK((grad - Point(2.0, -1.0)).norm() < 1e-12);
  }
}

TEST_CASE("triangulation of prefractal domains meets quality bounds") {
  for (const char* spec : {"square", "koch:2:1", "antikoch:1:1"}) {
    const auto d = generate_prefractal(parse_domain_spec(spec));
    const double h = d.wid / 5.0;
    const auto m = triangulate(d, h);
    CAPTURE(spec);
    CHECK(m.area() == doctest::Approx(d.area).epsilon(1e-10));
    CHECK(m.min_angle_degrees() >= 20.0);
    CHECK(m.max_edge_length() <= h * (1.0 + 1e-12));
    // Every polygon corner is a boundary vertex.
    for (const auto& v : d.vertices) {
      const bool found = std::any_of(m.boundary_indices.begin(), m.boundary_indices.end(),
                                     [&](int b) { return (m.vertices[b] - v).norm() < 1e-12; });
      CHECK(found);
    }
    // Boundary vertices are ordered along the boundary.
    for (std::size_t i = 0; i < m.num_boundary(); ++i) {
      const Point& a = m.vertices[m.boundary_indices[i]];
      const Point& b = m.vertices[m.boundary_indices[(i + 1) % m.num_boundary()]];
      CHECK((a - b).norm() <= h * (1.0 + 1e-12));
      CHECK(on_boundary(d, 0.5 * (a + b), 1e-10));
    }
  }
}

TEST_CASE("mesh file round trip") {
  const auto d = generate_prefractal(parse_domain_spec("koch:1:1"));
  const auto m = triangulate(d, 0.1);
  std::stringstream ss;
  write_mesh(ss, m);
  const auto r = read_mesh(ss);
  REQUIRE(r.num_vertices() == m.num_vertices());
  CHECK(r.triangles == m.triangles);
  CHECK(r.boundary_indices == m.boundary_indices);
  for (std::size_t i = 0; i < m.num_vertices(); ++i) CHECK(r.vertices[i] == m.vertices[i]);
}

TEST_CASE("malformed meshes are rejected") {
  std::istringstream bad("not a mesh\n");
  try {
    read_mesh(bad);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
  }
  // Clockwise triangle.
  CHECK_THROWS_AS(make_mesh({Point(0, 0), Point(1, 0), Point(0, 1)}, {{0, 2, 1}}, {0, 1, 2}), Error);
  CHECK_THROWS_AS(make_mesh({Point(0, 0), Point(1, 0), Point(0, 1)}, {{0, 1, 5}}, {0, 1, 2}), Error);
  CHECK_THROWS_AS(make_mesh({Point(0, 0)}, {}, {}), Error);
}

TEST_CASE("mesh size preconditions") {
  const auto d = generate_prefractal(parse_domain_spec("square"));
  CHECK_THROWS_AS(triangulate(d, 0.0), Error);
  CHECK_THROWS_AS(triangulate(d, -1.0), Error);
  CHECK_THROWS_AS(triangulate(d, 0.5), Error);
}
