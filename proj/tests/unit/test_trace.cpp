#include <cmath>
#include <sstream>

#include <doctest.h>

#include "calderon/error.hpp"
#include "calderon/trace.hpp"

using namespace calderon;
using namespace calderon::trace;

namespace {

const Mesh& unit_square() {
  static const Mesh m = rectangle_mesh(Point(0, 0), Point(1, 1), 10, 10);
  return m;
}

const Mesh& koch_mesh() {
  static const Mesh m = triangulate(geometry::generate_prefractal(geometry::parse_domain_spec("koch:2:1")), 0.08);
  return m;
}

Vector boundary_values(const Mesh& m, double (*f)(const Point&)) {
  Vector out(m.num_boundary());
  for (std::size_t i = 0; i < m.num_boundary(); ++i) out[i] = f(m.vertices[m.boundary_indices[i]]);
  return out;
}

}  // namespace

TEST_CASE("DtN quadratic form of x on the unit square is its energy") {
  const auto& m = unit_square();
  const auto dtn = assemble_dtn(m, ConductivityField::constant(1.0));
  const Vector f = boundary_values(m, [](const Point& p) { return p.x(); });
  CHECK(f.dot(dtn.lambda * f) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("DtN structure: symmetric, kills constants, positive semidefinite") {
  const auto dtn = assemble_dtn(koch_mesh(), ConductivityField::parse("1 + 0.3*sin(3*x)*y"));
  const auto s = check_structure(dtn.lambda);
  CHECK(s.symmetry < 1e-12);
  CHECK(s.constants < 1e-12);
  CHECK(s.min_eigenvalue > -1e-12);
}

TEST_CASE("DtN scales linearly with a constant factor") {
  const auto& m = koch_mesh();
  const auto a = assemble_dtn(m, ConductivityField::parse("1 + x^2"));
  const auto b = assemble_dtn(m, ConductivityField::parse("3*(1 + x^2)"));
  CHECK((b.lambda - 3.0 * a.lambda).cwiseAbs().maxCoeff() < 1e-10 * a.lambda.cwiseAbs().maxCoeff());
}

TEST_CASE("parallel Schur complement matches serial") {
  const auto& m = koch_mesh();
  const fem::InteriorSolver solver(m, fem::assemble_stiffness(m, ConductivityField::parse("2 + x")));
  const Matrix p = schur_complement(solver);
  const Matrix s = schur_complement_serial(solver);
  CHECK((p - s).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the trace Gram matrix has unit norm as a map B -> B'") {
  const auto gram = assemble_trace_gram(koch_mesh());
  CHECK(operator_norm(gram.matrix(), gram) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(operator_norm_dense(gram.matrix(), gram) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("block power iteration agrees with the dense eigen-solve") {
  const auto& m = koch_mesh();
  const auto gram = assemble_trace_gram(m);
  const auto a = assemble_dtn(m, ConductivityField::parse("1 + 0.5*bump(4*(x-0.5)^2 + 4*(y-0.3)^2)"));
  const auto b = assemble_dtn(m, ConductivityField::constant(1.0));
  const double dense = operator_norm_dense(a.lambda - b.lambda, gram);
  CHECK(operator_norm_diff(a, b, gram) == doctest::Approx(dense).epsilon(1e-7));
  CHECK(operator_norm(Matrix::Zero(gram.size(), gram.size()), gram) == 0.0);
}

TEST_CASE("gram norms are dual") {
  const auto gram = assemble_trace_gram(koch_mesh());
  const Vector f = Vector::LinSpaced(gram.size(), -1.0, 2.0);
  CHECK(gram.dual_norm(gram.matrix() * f) == doctest::Approx(gram.norm(f)).epsilon(1e-12));
  CHECK(dual_norm(gram.matrix() * f, gram) == doctest::Approx(gram.norm(f)).epsilon(1e-12));
  CHECK((gram.solve(Vector(gram.matrix() * f)) - f).norm() < 1e-10);
}

TEST_CASE("weak normal derivative of the 1-harmonic extension is isometric") {
  const auto& m = koch_mesh();
  const auto gram = assemble_trace_gram(m);
  const auto forms = fem::h1_forms(m);
  const Vector f = boundary_values(m, [](const Point& p) { return std::cos(2 * p.x()) + p.y(); });
  const Vector u = fem::solve_one_harmonic(m, f);
  CHECK(gram.norm(f) == doctest::Approx(fem::h1_norm(forms, u)).epsilon(1e-10));
  const Vector g = weak_normal_derivative(m, forms.h1, u);
  CHECK(gram.dual_norm(g) == doctest::Approx(fem::h1_norm(forms, u)).epsilon(1e-10));
}

TEST_CASE("Alessandrini identity holds to rounding") {
  const auto& m = koch_mesh();
  const Vector f1 = boundary_values(m, [](const Point& p) { return p.x(); });
  const Vector f2 = boundary_values(m, [](const Point& p) { return p.y() * p.y(); });
  const auto s = alessandrini_identity(m, ConductivityField::parse("1 + 0.4*x*y"),
                                       ConductivityField::parse("1.2 + 0.1*sin(y)"), f1, f2);
  CHECK(s.lhs == doctest::Approx(s.rhs).epsilon(1e-10));
}

TEST_CASE("modulation by a smooth multiplier stays below its bound") {
  const auto& m = koch_mesh();
  const auto gram = assemble_trace_gram(m);
  const auto phi = expr::Expression::parse("cos(3*x) + 0.5*y");
  const Vector f = boundary_values(m, [](const Point& p) { return std::sin(5 * p.x()) + p.y(); });
  const auto t = modulated_trace_norm_check(m, gram, phi, f);
  CHECK(t.lhs <= t.rhs);
  const auto d = modulated_dual_norm_check(m, gram, phi, Vector(gram.matrix() * f));
  CHECK(d.lhs <= d.rhs);
  CHECK(sampled_w1inf(m, expr::Expression::parse("2")) == doctest::Approx(2.0));
}

TEST_CASE("dense CSV round trip and parse errors") {
  const Matrix a = Matrix::Random(5, 5);
  std::stringstream ss;
  write_dense_csv(ss, a);
  CHECK(read_dense_csv(ss) == a);
  std::istringstream bad("# calderon-dtn v1, n=2\n1,2\n3\n");
  CHECK_THROWS_AS(read_dense_csv(bad), Error);
  std::istringstream missing("1,2\n");
  CHECK_THROWS_AS(read_dense_csv(missing), Error);
}

TEST_CASE("the sign fault breaks the constant kernel") {
  inject_fault(Fault::dtn_sign);
  const auto dtn = assemble_dtn(unit_square(), ConductivityField::constant(1.0));
  inject_fault(Fault::none);
  CHECK(injected_fault() == Fault::none);
  CHECK(check_structure(dtn.lambda).constants > 1e-6);
}
