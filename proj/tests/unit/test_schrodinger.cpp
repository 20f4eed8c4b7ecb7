#include <cmath>
#include <vector>

#include <doctest.h>

#include "calderon/error.hpp"
#include "calderon/schrodinger.hpp"

using namespace calderon;
using namespace calderon::schrodinger;

namespace {

const Mesh& unit_square() {
  static const Mesh m = rectangle_mesh(Point(0, 0), Point(1, 1), 10, 10);
  return m;
}

}  // namespace

TEST_CASE("analytic potential oracles") {
  const auto& m = unit_square();
  const auto q1 = compute_q(m, ConductivityField::parse("exp(2*x)"));
  CHECK(q1.analytic);
  CHECK((q1.values.array() - 1.0).abs().maxCoeff() < 1e-12);
  const auto q2 = compute_q(m, ConductivityField::parse("(x^2 + y^2 + 1)^2"));
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    const Point& p = m.vertices[i];
    CHECK(q2.values[i] == doctest::Approx(4.0 / (p.squaredNorm() + 1.0)).epsilon(1e-12));
  }
  CHECK(q2.sup_bound == doctest::Approx(4.0).epsilon(1e-12));
  const auto q0 = compute_q(m, ConductivityField::constant(3.0));
  CHECK(q0.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("discrete potential vanishes for constants and needs opt-in for piecewise fields") {
  const auto& m = unit_square();
  CHECK(discrete_q(m, ConductivityField::constant(2.0)).cwiseAbs().maxCoeff() < 1e-12);
  const auto collar =
      ConductivityField::piecewise_collar(Point(0.5, 0.5), 0.2, expr::Expression::parse("1 + x"), 1.0);
  CHECK_FALSE(compute_q(m, collar).analytic);
  try {
    compute_q(m, collar, false);
    FAIL("expected a capability error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::capability);
  }
}

TEST_CASE("Schrodinger DtN with q = 0 is the Laplace DtN") {
  const auto& m = unit_square();
  const auto a = assemble_dtn_schrodinger(m, Vector::Zero(m.num_vertices()));
  const auto b = trace::assemble_dtn(m, ConductivityField::constant(1.0));
  CHECK((a.lambda - b.lambda).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("strongly negative potentials lose coercivity") {
  const auto& m = unit_square();
  try {
    assemble_dtn_schrodinger(m, Vector::Constant(m.num_vertices(), -200.0));
    FAIL("expected a coercivity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::coercivity);
  }
}

TEST_CASE("conjugation is exact for constant conductivities") {
  CHECK(conjugation_check(unit_square(), ConductivityField::constant(4.0)) < 1e-12);
}

TEST_CASE("complex frequency is isotropic") {
  const auto f = ComplexFrequency::make(3.0, 0.7);
  CHECK(std::abs(f.self_dot()) < 1e-12);
  CHECK(f.magnitude() == doctest::Approx(3.0 * std::sqrt(2.0)));
  CHECK(f.omega1.dot(f.omega2) == doctest::Approx(0.0));
  CHECK(f.omega1.x() * f.omega2.y() - f.omega1.y() * f.omega2.x() == doctest::Approx(1.0));
  CHECK(std::abs(f.conjugate().xi()[0] - std::conj(f.xi()[0])) < 1e-14);
}

TEST_CASE("CGO sweep: zero potential is degenerate, parallel matches serial") {
  const auto d = geometry::generate_prefractal(geometry::parse_domain_spec("square"));
  const std::vector<double> taus = {1, 2, 4, 8};
  const CGOOptions opt{0.05, 0.0};
  const auto zero = cgo_decay_experiment(d, ConductivityField::constant(1.0), taus, opt);
  CHECK(zero.degenerate);
  for (const auto& r : zero.rows) CHECK(r.norm_r == 0.0);
  const auto g = ConductivityField::parse("1 + 0.3*bump(8*((x-0.5)^2 + (y-0.5)^2))");
  const auto par = cgo_decay_experiment(d, g, taus, opt);
  const auto ser = cgo_decay_experiment_serial(d, g, taus, opt);
  REQUIRE(par.rows.size() == ser.rows.size());
  for (std::size_t i = 0; i < par.rows.size(); ++i) {
    CHECK(par.rows[i].norm_r == ser.rows[i].norm_r);
    CHECK(par.rows[i].residual <= 1e-10);
  }
}

TEST_CASE("CGO sweep preconditions") {
  const auto d = geometry::generate_prefractal(geometry::parse_domain_spec("square"));
  const auto g = ConductivityField::parse("1 + 0.1*x");
  CHECK_THROWS_AS(cgo_decay_experiment(d, g, {1, 2, 3}, {0.05, 0.0}), Error);
  CHECK_THROWS_AS(cgo_decay_experiment(d, g, {1, 3, 2, 4}, {0.05, 0.0}), Error);
  CHECK_THROWS_AS(cgo_decay_experiment(d, g, {1, 2, 4, 40}, {0.05, 0.0}), Error);
}

TEST_CASE("product rule for interpolated normal derivatives") {
  const auto& m = unit_square();
  Vector chi(m.num_boundary());
  for (std::size_t i = 0; i < m.num_boundary(); ++i) chi[i] = 1.0 + m.vertices[m.boundary_indices[i]].x();
  const double defect = product_rule_defect(m, expr::Expression::parse("1 + x*y"),
                                            expr::Expression::parse("exp(0.5*x) + y"), chi);
  CHECK(defect < 0.05);
}
