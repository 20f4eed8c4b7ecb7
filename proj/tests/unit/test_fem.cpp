#include <cmath>

#include <doctest.h>

#include "calderon/error.hpp"
#include "calderon/fem.hpp"

using namespace calderon;
using namespace calderon::fem;

namespace {

const Mesh& unit_square() {
  static const Mesh m = rectangle_mesh(Point(0, 0), Point(1, 1), 8, 8);
  return m;
}

}  // namespace

TEST_CASE("stiffness annihilates constants and is symmetric") {
  const auto& m = unit_square();
  const auto a = assemble_stiffness(m, ConductivityField::parse("1 + x*y"));
  const Vector ones = Vector::Ones(m.num_vertices());
  CHECK((a * ones).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((Matrix(a) - Matrix(a).transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("parallel stiffness assembly matches serial bit for bit") {
  const Mesh m = rectangle_mesh(Point(0, 0), Point(1, 1), 20, 20);
  const Vector c = centroid_values(m, ConductivityField::parse("exp(x) + y^2"));
  const SparseMatrix p = assemble_stiffness(m, c);
  const SparseMatrix s = assemble_stiffness_serial(m, c);
  CHECK(p.nonZeros() == s.nonZeros());
  CHECK((Matrix(p) - Matrix(s)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("energy of linear functions is exact") {
  const auto& m = unit_square();
  const auto a = assemble_stiffness(m, ConductivityField::constant(1.0));
  const Vector u = interpolate(m, [](const Point& p) { return 2.0 * p.x() - 3.0 * p.y(); });
  CHECK(u.dot(a * u) == doctest::Approx(13.0).epsilon(1e-12));
  CHECK(h10_seminorm(m, u) == doctest::Approx(std::sqrt(13.0)).epsilon(1e-12));
}

TEST_CASE("lumped mass integrates constants") {
  const auto& m = unit_square();
  CHECK(lumped_mass(m).sum() == doctest::Approx(1.0).epsilon(1e-14));
  const Vector ones = Vector::Ones(m.num_vertices());
  CHECK(l2_norm(m, ones) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(h10_seminorm(m, ones) < 1e-12);
  CHECK(h1_norm(m, ones) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(Vector(assemble_mass(m) * ones).sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("dirichlet solve reproduces linear functions") {
  const auto& m = unit_square();
  const Vector exact = interpolate(m, [](const Point& p) { return 1.0 + p.x() - 0.5 * p.y(); });
  const Vector u = solve_dirichlet(m, ConductivityField::constant(2.5), boundary_trace(m, exact));
  CHECK((u - exact).cwiseAbs().maxCoeff() < 1e-12);
  const InteriorSolver solver(m, assemble_stiffness(m, ConductivityField::constant(1.0)));
  CHECK((solver.extend(boundary_trace(m, exact)) - exact).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(solver.min_pivot() > 0.0);
}

TEST_CASE("block split and restriction are consistent") {
  const auto& m = unit_square();
  const auto a = assemble_stiffness(m, ConductivityField::constant(1.0));
  const auto b = split_blocks(m, a);
  CHECK(b.ii.rows() == static_cast<Eigen::Index>(m.num_interior()));
  CHECK(b.bb.rows() == static_cast<Eigen::Index>(m.num_boundary()));
  CHECK(b.ib.rows() == b.ii.rows());
  CHECK(b.ib.cols() == b.bb.cols());
  const Vector u = interpolate(m, [](const Point& p) { return p.x() * p.y(); });
  const Vector ui = restrict_to(u, m.interior_indices);
  const Vector ub = restrict_to(u, m.boundary_indices);
  const Vector full = a * u;
  CHECK((Vector(b.ii * ui + b.ib * ub) - restrict_to(full, m.interior_indices)).norm() < 1e-12);
}

TEST_CASE("lifted solution obeys its energy bound") {
  const auto& m = unit_square();
  const Vector phi = interpolate(m, [](const Point& p) { return std::sin(3 * p.x()) * p.y(); });
  const auto eta = [](const Point& p) { return 0.2 * std::cos(p.x() + p.y()); };
  const auto lifted = solve_lifted(m, ConductivityField::parse("1 + 0.5*x"), eta, phi);
  CHECK(lifted.norm > 0.0);
  CHECK(lifted.norm <= lifted.bound);
  CHECK(restrict_to(lifted.u, m.boundary_indices).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-positive conductivities are rejected") {
  const auto& m = unit_square();
  try {
    assemble_stiffness(m, ConductivityField::parse("x - 0.5"));
    FAIL("expected an ellipticity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ellipticity);
  }
  const Vector signed_values = centroid_values(m, [](const Point& p) { return p.x() - 0.5; }, true);
  CHECK(signed_values.minCoeff() < 0.0);
}
