#include <cmath>

#include <doctest.h>

#include "calderon/error.hpp"
#include "calderon/inverse.hpp"

using namespace calderon;
using namespace calderon::inverse;

namespace {

const geometry::PlanarDomain& square() {
  static const auto d = geometry::generate_prefractal(geometry::parse_domain_spec("square"));
  return d;
}

}  // namespace

TEST_CASE("inverse quartic integral over the unit square matches quadrature") {
  // Reference values from adaptive 2D quadrature.
  CHECK(inverse_quartic_integral(square(), Point(0.5, -0.25)) == doctest::Approx(10.482143020313314).epsilon(1e-9));
  CHECK(inverse_quartic_integral(square(), Point(0.5, -0.0625)) == doctest::Approx(197.9953073866805).epsilon(1e-9));
  CHECK(inverse_quartic_integral(square(), Point(1.3, 1.2)) == doctest::Approx(1.9110526109757353).epsilon(1e-9));
  CHECK(inverse_quartic_integral(square(), Point(-0.1, 0.5)) == doctest::Approx(75.69110853799184).epsilon(1e-9));
  CHECK_THROWS_AS(inverse_quartic_integral(square(), Point(0.5, 0.5)), Error);
}

TEST_CASE("dipole probe") {
  const Point z(0.0, -1.0), nu(0.0, 1.0);
  CHECK(dipole(z, nu, Point(0.0, 0.0)) == doctest::Approx(1.0));
  CHECK(dipole(z, nu, Point(1.0, -1.0)) == doctest::Approx(0.0));
  // |grad U| = |x - z|^-2.
  const Point x(0.3, 0.4);
  const double h = 1e-6;
  const Point g((dipole(z, nu, x + Point(h, 0)) - dipole(z, nu, x - Point(h, 0))) / (2 * h),
                (dipole(z, nu, x + Point(0, h)) - dipole(z, nu, x - Point(0, h))) / (2 * h));
  CHECK(g.norm() == doctest::Approx(1.0 / (x - z).squaredNorm()).epsilon(1e-7));
}

TEST_CASE("recovery schedule is certified and decreasing") {
  const Point x0(0.5, 0.0);
  const auto s = make_schedule(square(), x0, 0.01);
  REQUIRE(s.k.size() >= 3);
  for (std::size_t i = 0; i < s.k.size(); ++i) {
    CHECK(s.certificates[i].verify(square()));
    CHECK(s.sigma[i] == doctest::Approx((s.certificates[i].z - x0).norm()));
    CHECK(s.sigma[i] >= 4.0 * 0.01);
    if (i) CHECK(s.sigma[i] < s.sigma[i - 1]);
  }
}

TEST_CASE("singular probe concentrates near its pole") {
  const Mesh m = rectangle_mesh(Point(0, 0), Point(1, 1), 24, 24);
  const auto p = build_singular_probe(m, square(), ConductivityField::parse("1 + 0.2*x"), Point(0.5, -0.2));
  CHECK(p.residual < 1e-10);
  CHECK(p.scale == doctest::Approx(1.0 / 1.1));
  CHECK(p.near_gradient > p.far_gradient);
  CHECK_THROWS_AS(build_singular_probe(m, square(), ConductivityField::constant(1.0), Point(0.5, 0.5)), Error);
}

TEST_CASE("boundary recovery of a constant jump") {
  const Mesh m = triangulate(square(), 0.02);
  const auto g1 = ConductivityField::constant(1.1);
  const auto g2 = ConductivityField::constant(1.0);
  const auto l1 = trace::assemble_dtn(m, g1).lambda;
  const auto l2 = trace::assemble_dtn(m, g2).lambda;
  const auto r = boundary_recovery(m, square(), l1, l2, g1, g2, make_schedule(square(), Point(0.5, 0.0), 0.02));
  CHECK(r.estimate == doctest::Approx(0.1).epsilon(0.05));
  const auto same = boundary_recovery(m, square(), l2, l2, g2, g2, make_schedule(square(), Point(0.5, 0.0), 0.02));
  CHECK(std::abs(same.estimate) < 1e-12);
}

TEST_CASE("H^-1 norm of zero and the log quotient of constants") {
  const Mesh m = rectangle_mesh(Point(0, 0), Point(1, 1), 12, 12);
  CHECK(h_minus_one_norm(m, Vector::Zero(m.num_vertices())) == 0.0);
  CHECK(h_minus_one_norm(m, Vector::Ones(m.num_vertices())) > 0.0);
  const auto lq = log_quotient_solve(m, ConductivityField::constant(2.0), ConductivityField::constant(1.0));
  CHECK((lq.reference.array() - std::log(2.0)).abs().maxCoeff() < 1e-14);
  CHECK(lq.l2_error < 1e-10);
}

TEST_CASE("Schrodinger gap vanishes for a constant pair") {
  const Mesh m = rectangle_mesh(Point(0, 0), Point(1, 1), 10, 10);
  const auto gram = trace::assemble_trace_gram(m);
  const auto g = schrodinger_dtn_gap(m, ConductivityField::constant(1.0), ConductivityField::constant(2.0), gram);
  CHECK(g.lhs < 1e-12);
  CHECK(g.boundary_diff == doctest::Approx(1.0));
  CHECK(g.lambda_diff > 0.0);
}

TEST_CASE("direct stability is linear in the perturbation size") {
  const Mesh m = triangulate(geometry::generate_prefractal(geometry::parse_domain_spec("koch:1:1")), 0.06);
  const auto r = direct_stability_experiment(m, expr::Expression::parse("bump(9*((x-0.5)^2 + (y-0.3)^2))"),
                                             {0.025, 0.05, 0.1, 0.2});
  REQUIRE(r.rows.size() == 4);
  CHECK(r.slope == doctest::Approx(1.0).epsilon(0.1));
  CHECK(r.max_ratio <= 1.0);
}
