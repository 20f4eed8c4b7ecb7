#include <cmath>

#include <doctest.h>

#include "calderon/error.hpp"
#include "calderon/expression.hpp"

using calderon::Error;
using calderon::ErrorKind;
using namespace calderon::expr;

TEST_CASE("arithmetic precedence and functions") {
  CHECK(Expression::parse("1 + 2 * 3")(0, 0) == doctest::Approx(7.0));
  CHECK(Expression::parse("(1 + 2) * 3")(0, 0) == doctest::Approx(9.0));
  CHECK(Expression::parse("2 ^ 3 ^ 2")(0, 0) == doctest::Approx(512.0));
  CHECK(Expression::parse("-2 ^ 2")(0, 0) == doctest::Approx(-4.0));
  CHECK(Expression::parse("1 - 2 - 3")(0, 0) == doctest::Approx(-4.0));
  CHECK(Expression::parse("8 / 4 / 2")(0, 0) == doctest::Approx(1.0));
  CHECK(Expression::parse("1.5e1")(0, 0) == doctest::Approx(15.0));
  CHECK(Expression::parse("x*y + exp(x) + sin(y) + cos(x) + sqrt(y) + log(x)")(2.0, 0.25) ==
        doctest::Approx(0.5 + std::exp(2.0) + std::sin(0.25) + std::cos(2.0) + 0.5 + std::log(2.0)));
}

TEST_CASE("bump profile") {
  const auto b = Expression::parse("bump(x)");
  CHECK(b(0.0, 0.0) == doctest::Approx(1.0));
  CHECK(b(0.5, 0.0) == doctest::Approx(std::exp(1.0 - 2.0)));
  CHECK(b(1.0, 0.0) == 0.0);
  CHECK(b(2.0, 0.0) == 0.0);
  // Smooth at the edge of the support: the derivative vanishes there.
  CHECK(std::abs(b.derivative(Var::x)(0.999, 0.0)) < 1e-100);
}

TEST_CASE("symbolic derivatives match finite differences") {
  const auto e = Expression::parse("exp(2*x) * sin(y) + x^3 / (1 + y^2) + 0.3*bump(x^2 + y^2)");
  const double x = 0.3, y = -0.4, h = 1e-6;
  const double fdx = (e(x + h, y) - e(x - h, y)) / (2 * h);
  const double fdy = (e(x, y + h) - e(x, y - h)) / (2 * h);
  CHECK(e.derivative(Var::x)(x, y) == doctest::Approx(fdx).epsilon(1e-7));
  CHECK(e.derivative(Var::y)(x, y) == doctest::Approx(fdy).epsilon(1e-7));
  const double h2 = 1e-4;
  const double lap = (e(x + h2, y) + e(x - h2, y) + e(x, y + h2) + e(x, y - h2) - 4 * e(x, y)) / (h2 * h2);
  CHECK(e.laplacian()(x, y) == doctest::Approx(lap).epsilon(1e-5));
}

TEST_CASE("closed form laplacians") {
  CHECK(Expression::parse("x^2 + y^2").laplacian()(0.7, -3.0) == doctest::Approx(4.0));
  CHECK(Expression::parse("exp(x) * cos(y)").laplacian()(0.2, 0.9) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(Expression::parse("5").laplacian()(0.1, 0.1) == 0.0);
}

TEST_CASE("parameters bind to constants") {
  const auto e = Expression::parse("1 + t*x", {"t"});
  CHECK(e.has_free_parameters());
  try {
    e(1.0, 0.0);
    FAIL("expected an unbound parameter error");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::config);
  }
  const auto b = e.bind("t", 0.5);
  CHECK_FALSE(b.has_free_parameters());
  CHECK(b(2.0, 0.0) == doctest::Approx(2.0));
  CHECK_FALSE(Expression::parse("3 + 4").depends_on_position());
  CHECK(Expression::parse("y").depends_on_position());
}

TEST_CASE("to_string round trips") {
  const auto e = Expression::parse("exp(2*x) - y / (1 + x^2)");
  const auto r = Expression::parse(e.to_string());
  CHECK(r(0.3, 0.7) == doctest::Approx(e(0.3, 0.7)));
}

TEST_CASE("malformed expressions raise parse errors") {
  for (const char* bad : {"", "1 +", "(x", "x y", "foo(x)", "1..2", "z", "exp x", ")"}) {
    CAPTURE(bad);
    try {
      Expression::parse(bad);
      FAIL("expected a parse error");
    } catch (const Error& err) {
      CHECK(err.kind() == ErrorKind::parse);
    }
  }
}

TEST_CASE("operator overloads build the same trees") {
  const auto x = Expression::variable(Var::x);
  const auto y = Expression::variable(Var::y);
  const auto e = exp(Expression::constant(2.0) * x) + sqrt(y) / (x - y) - pow(x, Expression::constant(2.0));
  const auto p = Expression::parse("exp(2*x) + sqrt(y)/(x - y) - x^2");
  CHECK(e(0.4, 0.25) == doctest::Approx(p(0.4, 0.25)));
  CHECK(-x(0.4, 0.0) == doctest::Approx((-x)(0.4, 0.0)));
}
