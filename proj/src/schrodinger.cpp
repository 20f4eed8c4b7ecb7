#include "calderon/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "calderon/error.hpp"
#include "calderon/stats.hpp"

namespace calderon::schrodinger {

using expr::Expression;
using expr::Var;

PotentialField compute_q(const Mesh& mesh, const ConductivityField& gamma, bool allow_discrete) {
  PotentialField q;
  if (gamma.has_gradient()) {
    q.analytic = true;
    q.eval = [gamma](const Point& p) { return gamma.laplacian_sqrt(p) / std::sqrt(gamma(p)); };
    q.values = fem::interpolate(mesh, q.eval);
    q.sup_bound = q.values.cwiseAbs().maxCoeff();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
      q.sup_bound = std::max(q.sup_bound, std::abs(q.eval(mesh.centroid(t))));
    return q;
  }
  if (!allow_discrete)
    fail(ErrorKind::capability, "conductivity has no second derivatives and the discrete fallback is disabled");
  q.values = discrete_q(mesh, gamma);
  q.sup_bound = q.values.cwiseAbs().maxCoeff();
  return q;
}

Vector discrete_q(const Mesh& mesh, const ConductivityField& gamma) {
  const fem::H1Forms forms = fem::h1_forms(mesh);
  const Vector s = fem::interpolate(mesh, [&gamma](const Point& p) { return std::sqrt(gamma(p)); });
  const Vector lap = forms.laplace * s;
  Vector q = Vector::Zero(s.size());
  for (int v : mesh.interior_indices) q[v] = -lap[v] / (forms.mass[v] * s[v]);
  return q;
}

double equivalence_residual(const Mesh& mesh, const ConductivityField& gamma, const Vector& f) {
  const PotentialField q = compute_q(mesh, gamma);
  const Vector u = fem::solve_dirichlet(mesh, gamma, f);
  const Vector v = fem::interpolate(mesh, [&gamma](const Point& p) { return std::sqrt(gamma(p)); }).cwiseProduct(u);
  const fem::H1Forms forms = fem::h1_forms(mesh);
  const Vector r = forms.laplace * v + forms.mass.cwiseProduct(q.values).cwiseProduct(v);
  const Vector ri = fem::restrict_to(r, mesh.interior_indices);
  const fem::InteriorSolver k(mesh, forms.h1);
  return std::sqrt(std::max(0.0, ri.dot(k.solve_interior(ri))));
}

trace::DtNOperator assemble_dtn_schrodinger(const Mesh& mesh, const Vector& q) {
  require(static_cast<std::size_t>(q.size()) == mesh.num_vertices(), "q must be sampled at every vertex");
  const fem::H1Forms forms = fem::h1_forms(mesh);
  SparseMatrix a = forms.laplace;
  for (Eigen::Index i = 0; i < q.size(); ++i) a.coeffRef(i, i) += q[i] * forms.mass[i];
  const fem::InteriorSolver solver(mesh, a);
  if (mesh.num_interior() > 0 && !(solver.min_pivot() > 0.0))
    fail(ErrorKind::coercivity, "Schrodinger form is not coercive on the interior (pivot " +
                                    std::to_string(solver.min_pivot()) + ")");
  return trace::assemble_dtn(solver, "schrodinger");
}

double conjugation_check(const Mesh& mesh, const ConductivityField& gamma) {
  return conjugation_check(mesh, gamma, trace::assemble_trace_gram(mesh));
}

double conjugation_check(const Mesh& mesh, const ConductivityField& gamma, const trace::BoundaryGram& gram) {
  const PotentialField q = compute_q(mesh, gamma);
  const trace::DtNOperator tilde = assemble_dtn_schrodinger(mesh, q.values);
  const trace::DtNOperator lambda = trace::assemble_dtn(mesh, gamma);
  Vector d(static_cast<Eigen::Index>(mesh.num_boundary()));
  for (std::size_t k = 0; k < mesh.num_boundary(); ++k)
    d[static_cast<Eigen::Index>(k)] = 1.0 / std::sqrt(gamma(mesh.vertices[mesh.boundary_indices[k]]));
  const Matrix conj = d.asDiagonal() * lambda.lambda * d.asDiagonal();
  const double scale = trace::operator_norm(tilde.lambda, gram);
  if (scale == 0.0) fail(ErrorKind::invariant, "conjugated operator vanishes");
  return trace::operator_norm(tilde.lambda - conj, gram) / scale;
}

ComplexFrequency ComplexFrequency::make(double tau, double angle) {
  require(tau > 0.0, "tau must be positive");
  ComplexFrequency f;
  f.tau = tau;
  f.omega1 = Point(std::cos(angle), std::sin(angle));
  f.omega2 = Point(-std::sin(angle), std::cos(angle));
  return f;
}

Eigen::Vector2cd ComplexFrequency::xi() const {
  using C = std::complex<double>;
  return {tau * C(omega1.x(), omega2.x()), tau * C(omega1.y(), omega2.y())};
}

std::complex<double> ComplexFrequency::self_dot() const {
  const Eigen::Vector2cd x = xi();
  return x[0] * x[0] + x[1] * x[1];
}

double ComplexFrequency::magnitude() const { return xi().norm(); }

ComplexFrequency ComplexFrequency::conjugate() const {
  ComplexFrequency f = *this;
  f.omega2 = -omega2;
  return f;
}

CGOBox cgo_box(const geometry::PlanarDomain& domain, double h, double angle) {
  require(h > 0.0, "box mesh spacing must be positive");
  CGOBox box;
  box.omega1 = Point(std::cos(angle), std::sin(angle));
  const Point omega2(-box.omega1.y(), box.omega1.x());
  Point lo(std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
  Point hi = -lo;
  for (const Point& p : domain.vertices) {
    const Point st(p.dot(box.omega1), p.dot(omega2));
    lo = lo.cwiseMin(st);
    hi = hi.cwiseMax(st);
  }
  const Point centre = 0.5 * (lo + hi);
  const Point half = 0.75 * (hi - lo);
  box.nx = std::max(2, static_cast<int>(std::ceil(2.0 * half.x() / h)));
  if (box.nx % 2) ++box.nx;
  box.ny = std::max(2, static_cast<int>(std::ceil(2.0 * half.y() / h)));
  const Point extent(box.nx * h, box.ny * h);
  Mesh mesh = rectangle_mesh(centre - 0.5 * extent, centre + 0.5 * extent, box.nx, box.ny);
  for (Point& p : mesh.vertices) p = p.x() * box.omega1 + p.y() * omega2;
  box.mesh = std::move(mesh);
  return box;
}

CGOSolution solve_cgo_remainder(const CGOBox& box, const Vector& q, const std::vector<char>& in_omega,
                                const ComplexFrequency& frequency) {
  using C = std::complex<double>;
  using Triplet = Eigen::Triplet<C>;
  const Mesh& mesh = box.mesh;
  require(static_cast<std::size_t>(q.size()) == mesh.num_vertices(), "q must be sampled on the box mesh");
  require(in_omega.size() == mesh.num_triangles(), "one Omega flag per box triangle");
  require((frequency.omega1 - box.omega1).norm() < 1e-12, "box must be aligned with omega1");
  // Vertex (i, j) maps to dof (i mod nx, j mod ny); wrapping along omega1 flips the sign.
  const int stride = box.nx + 1;
  std::vector<int> dof(mesh.num_vertices());
  std::vector<double> phase(mesh.num_vertices());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const int i = static_cast<int>(v) % stride, j = static_cast<int>(v) / stride;
    dof[v] = (j % box.ny) * box.nx + (i % box.nx);
    phase[v] = i == box.nx ? -1.0 : 1.0;
  }
  const Eigen::Vector2cd xi = frequency.xi();
  const Eigen::Index n = static_cast<Eigen::Index>(box.nx) * box.ny;
  std::vector<Triplet> triplets;
  triplets.reserve(12 * mesh.num_triangles());
  ComplexVector rhs = ComplexVector::Zero(n);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = mesh.hat_gradients(t);
    const double area = mesh.triangle_area(t);
    const auto& tri = mesh.triangles[t];
    for (int j = 0; j < 3; ++j) {
      const C convect = xi[0] * g[j].x() + xi[1] * g[j].y();
      for (int i = 0; i < 3; ++i) {
        const double sign = phase[tri[i]] * phase[tri[j]];
        triplets.emplace_back(dof[tri[i]], dof[tri[j]], sign * (area * g[i].dot(g[j]) - 2.0 * convect * (area / 3.0)));
      }
      triplets.emplace_back(dof[tri[j]], dof[tri[j]], area / 3.0 * q[tri[j]]);
      rhs[dof[tri[j]]] -= phase[tri[j]] * area / 3.0 * q[tri[j]];
    }
  }
  Eigen::SparseMatrix<C> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();

  CGOSolution s;
  s.frequency = frequency;
  s.remainder = ComplexVector::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
  if (rhs.norm() == 0.0) return s;
  Eigen::SparseLU<Eigen::SparseMatrix<C>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) fail(ErrorKind::solver, "complex sparse LU failed: " + lu.lastErrorMessage());
  ComplexVector x = lu.solve(rhs);
  if (!x.allFinite()) fail(ErrorKind::solver, "CGO solve produced non-finite values");
  s.residual = (a * x - rhs).norm() / rhs.norm();
  // Iterative refinement against the same factorization.
  for (int step = 0; step < 5 && s.residual > 1e-12; ++step) {
    x += lu.solve(ComplexVector(rhs - a * x));
    s.residual = (a * x - rhs).norm() / rhs.norm();
  }
  if (!(s.residual <= 1e-10))
    fail(ErrorKind::solver, "CGO solve relative residual " + std::to_string(s.residual) + " above 1e-10 (tau " +
                                std::to_string(frequency.tau) + ")");
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) s.remainder[v] = phase[v] * x[dof[v]];
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    if (!in_omega[t]) continue;
    double local = 0.0;
    for (int v : mesh.triangles[t]) local += std::norm(s.remainder[v]);
    sum += mesh.triangle_area(t) / 3.0 * local;
  }
  s.norm_omega = std::sqrt(sum);
  return s;
}

namespace {

CGODecayReport cgo_decay_impl(const geometry::PlanarDomain& domain, const ConductivityField& gamma,
                              const std::vector<double>& taus, const CGOOptions& options, bool parallel) {
  if (taus.size() < 4) fail(ErrorKind::config, "CGO sweep needs at least 4 tau values");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0)) fail(ErrorKind::config, "tau values must be positive");
    if (i > 0 && !(taus[i] > taus[i - 1])) fail(ErrorKind::config, "tau values must be increasing");
  }
  if (!(options.h > 0.0)) fail(ErrorKind::config, "h must be positive");
  if (options.h * taus.back() > 0.5 + 1e-12)
    fail(ErrorKind::config, "resolution violated: h * tau_max = " + std::to_string(options.h * taus.back()) +
                                " exceeds 0.5");
  if (!gamma.has_gradient()) fail(ErrorKind::capability, "CGO sweep needs an analytic potential");

  const CGOBox cbox = cgo_box(domain, options.h, options.angle);
  const Mesh& box = cbox.mesh;
  auto q_eval = [&](const Point& p) {
    return geometry::contains(domain, p) ? gamma.laplacian_sqrt(p) / std::sqrt(gamma(p)) : 0.0;
  };
  const Vector q = fem::interpolate(box, q_eval);
  std::vector<char> in_omega(box.num_triangles());
  for (std::size_t t = 0; t < box.num_triangles(); ++t) in_omega[t] = geometry::contains(domain, box.centroid(t));

  CGODecayReport report;
  report.h = options.h;
  report.q_sup = q.cwiseAbs().maxCoeff();
  for (std::size_t t = 0; t < box.num_triangles(); ++t)
    report.q_sup = std::max(report.q_sup, std::abs(q_eval(box.centroid(t))));
  report.rows.resize(taus.size());
  const auto count = static_cast<std::ptrdiff_t>(taus.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const ComplexFrequency f = ComplexFrequency::make(taus[i], options.angle);
    const CGOSolution s = solve_cgo_remainder(cbox, q, in_omega, f);
    report.rows[i] = {taus[i], f.magnitude(), s.norm_omega, s.residual};
  }
  if (report.q_sup == 0.0) {
    report.degenerate = true;
    report.slope = std::numeric_limits<double>::quiet_NaN();
    return report;
  }
  std::vector<double> lx, ly;
  for (const CGORow& r : report.rows) {
    if (r.abs_xi <= report.q_sup) {
      report.plateau = std::max(report.plateau, r.norm_r / report.q_sup);
    } else if (r.norm_r > 0.0) {
      lx.push_back(std::log(r.abs_xi));
      ly.push_back(std::log(r.norm_r));
    }
  }
  report.fit_points = static_cast<int>(lx.size());
  if (lx.size() >= 2) {
    report.slope = stats::linear_fit(lx, ly).slope;
  } else {
    report.degenerate = true;
    report.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

}  // namespace

CGODecayReport cgo_decay_experiment(const geometry::PlanarDomain& domain, const ConductivityField& gamma,
                                    const std::vector<double>& taus, const CGOOptions& options) {
  return cgo_decay_impl(domain, gamma, taus, options, true);
}

CGODecayReport cgo_decay_experiment_serial(const geometry::PlanarDomain& domain, const ConductivityField& gamma,
                                           const std::vector<double>& taus, const CGOOptions& options) {
  return cgo_decay_impl(domain, gamma, taus, options, false);
}

namespace {

Vector normal_derivative_of(const Mesh& mesh, const fem::H1Forms& forms, const Expression& u) {
  const Vector uh = fem::interpolate(mesh, [&u](const Point& p) { return u(p.x(), p.y()); });
  const Expression lap = u.laplacian();
  const Vector div = fem::interpolate(mesh, [&lap](const Point& p) { return lap(p.x(), p.y()); });
  return trace::weak_normal_derivative(mesh, forms.laplace, uh, div);
}

Vector boundary_samples(const Mesh& mesh, const Expression& e) {
  Vector v(static_cast<Eigen::Index>(mesh.num_boundary()));
  for (std::size_t k = 0; k < mesh.num_boundary(); ++k) {
    const Point& p = mesh.vertices[mesh.boundary_indices[k]];
    v[static_cast<Eigen::Index>(k)] = e(p.x(), p.y());
  }
  return v;
}

}  // namespace

double product_rule_defect(const Mesh& mesh, const Expression& phi, const Expression& psi, const Vector& chi) {
  require(static_cast<std::size_t>(chi.size()) == mesh.num_boundary(), "chi must be a trace vector");
  const fem::H1Forms forms = fem::h1_forms(mesh);
  const double lhs = chi.dot(normal_derivative_of(mesh, forms, phi * psi));
  const double r1 = boundary_samples(mesh, psi).cwiseProduct(chi).dot(normal_derivative_of(mesh, forms, phi));
  const double r2 = boundary_samples(mesh, phi).cwiseProduct(chi).dot(normal_derivative_of(mesh, forms, psi));
  const double scale = std::abs(lhs) + std::abs(r1) + std::abs(r2);
  return scale == 0.0 ? 0.0 : std::abs(lhs - r1 - r2) / scale;
}

double collar_normal_derivative(const Mesh& mesh, const trace::BoundaryGram& gram, const ConductivityField& gamma,
                                const Expression& u) {
  if (!gamma.has_gradient()) fail(ErrorKind::capability, "collar check needs an analytic conductivity");
  const Expression& g = gamma.expression();
  const Expression div = g * u.laplacian() + g.derivative(Var::x) * u.derivative(Var::x) +
                         g.derivative(Var::y) * u.derivative(Var::y);
  const Vector uh = fem::interpolate(mesh, [&u](const Point& p) { return u(p.x(), p.y()); });
  const Vector dh = fem::interpolate(mesh, [&div](const Point& p) { return div(p.x(), p.y()); });
  const Vector n = trace::weak_normal_derivative(mesh, fem::assemble_stiffness(mesh, gamma), uh, dh);
  return gram.dual_norm(n);
}

}  // namespace calderon::schrodinger
