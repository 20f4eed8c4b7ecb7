#include "calderon/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "calderon/error.hpp"
#include "calderon/stats.hpp"

namespace calderon::inverse {

namespace {

Point triangle_gradient(const Mesh& mesh, std::size_t t, const Vector& u) {
  const auto g = mesh.hat_gradients(t);
  Point s = Point::Zero();
  for (int i = 0; i < 3; ++i) s += u[mesh.triangles[t][i]] * g[i];
  return s;
}

double boundary_sup_diff(const Mesh& mesh, const ConductivityField& g1, const ConductivityField& g2) {
  double m = 0.0;
  for (int v : mesh.boundary_indices) m = std::max(m, std::abs(g1(mesh.vertices[v]) - g2(mesh.vertices[v])));
  return m;
}

double sampled_sup_diff(const Mesh& mesh, const ConductivityField& g1, const ConductivityField& g2) {
  double m = 0.0;
  for (const Point& p : mesh.vertices) m = std::max(m, std::abs(g1(p) - g2(p)));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Point c = mesh.centroid(t);
    m = std::max(m, std::abs(g1(c) - g2(c)));
  }
  return m;
}

// int ds / (p^2 + s^2)^2 over [s0, s1].
double edge_kernel(double p, double s0, double s1) {
  const double ap = std::abs(p);
  if (s0 * s1 > 0.0 && ap < 1e-4 * std::min(std::abs(s0), std::abs(s1))) {
    auto tail = [p](double s) { return -1.0 / (3.0 * s * s * s) + 2.0 * p * p / (5.0 * std::pow(s, 5)); };
    return tail(s1) - tail(s0);
  }
  auto f = [ap](double s) { return s / (2.0 * ap * ap * (ap * ap + s * s)) + std::atan(s / ap) / (2.0 * ap * ap * ap); };
  return f(s1) - f(s0);
}

}  // namespace

double dipole(const Point& z, const Point& nu, const Point& x) {
  const Point r = x - z;
  return nu.dot(r) / r.squaredNorm();
}

double inverse_quartic_integral(const geometry::PlanarDomain& domain, const Point& z) {
  if (contains(domain, z) || geometry::on_boundary(domain, z))
    fail(ErrorKind::geometry, "the singular point must lie outside the closed domain");
  double sum = 0.0;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const Point& a = domain.vertex(i);
    const Point& b = domain.vertex(i + 1);
    const double len = (b - a).norm();
    if (len == 0.0) continue;
    const Point e = (b - a) / len;
    const Point n(e.y(), -e.x());
    const double p = (a - z).dot(n);
    if (p == 0.0) continue;
    const double s0 = (a - z).dot(e);
    sum += p * edge_kernel(p, s0, s0 + len);
  }
  return -0.5 * sum;
}

SingularProbe build_singular_probe(const Mesh& mesh, const geometry::PlanarDomain& domain,
                                   const ConductivityField& gamma, const Point& z) {
  const fem::InteriorSolver solver(mesh, fem::assemble_stiffness(mesh, gamma));
  return build_singular_probe(solver, domain, gamma, z);
}

SingularProbe build_singular_probe(const fem::InteriorSolver& solver, const geometry::PlanarDomain& domain,
                                   const ConductivityField& gamma, const Point& z) {
  const Mesh& mesh = solver.mesh();
  const double h = mesh.max_edge_length();
  const double d = geometry::distance_to_boundary(domain, z);
  if (contains(domain, z)) fail(ErrorKind::geometry, "the singular point lies inside the domain");
  if (d < 2.0 * h) fail(ErrorKind::geometry, "the singular point is closer than 2h to the boundary");

  SingularProbe p;
  p.z = z;
  p.x0_star = geometry::nearest_boundary_point(domain, z);
  p.nu = (p.x0_star - z) / (p.x0_star - z).norm();
  p.scale = 1.0 / gamma(p.x0_star);
  const Vector lead = p.scale * fem::interpolate(mesh, [&](const Point& x) { return dipole(z, p.nu, x); });
  p.trace = fem::boundary_trace(mesh, lead);
  p.u = solver.extend(p.trace);

  const auto& blocks = solver.blocks();
  const Vector ui = fem::restrict_to(p.u, mesh.interior_indices);
  const Vector load = blocks.ib * p.trace;
  const double scale = std::max(load.norm(), std::numeric_limits<double>::min());
  p.residual = (blocks.ii * ui + load).norm() / scale;

  double energy = 0.0;
  const Vector w = p.u - lead;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    energy += triangle_gradient(mesh, t, w).squaredNorm() * mesh.triangle_area(t);
    const double r = (mesh.centroid(t) - z).norm();
    const double g = triangle_gradient(mesh, t, p.u).norm();
    if (r < 2.0 * d) p.near_gradient = std::max(p.near_gradient, g);
    if (r > 4.0 * d) p.far_gradient = std::max(p.far_gradient, g);
  }
  p.correction_norm = std::sqrt(energy);
  p.concentrated = p.near_gradient > p.far_gradient;
  return p;
}

RecoverySchedule make_schedule(const geometry::PlanarDomain& domain, const Point& x0, double h, int k_min,
                               int k_max) {
  require(h > 0.0, "mesh size must be positive");
  if (k_min <= 0) {
    k_min = 0;
    while (std::ldexp(1.0, -k_min) >= 0.5 * domain.diam) ++k_min;
  }
  RecoverySchedule s;
  s.x0 = x0;
  for (int k = k_min; k <= k_max; ++k) {
    const double r = std::ldexp(1.0, -k);
    if (r < 4.0 * h) break;
    const auto cert = geometry::find_corkscrew_point(domain, x0, r);
    const double sigma = (cert.z - x0).norm();
    if (sigma < 4.0 * h) break;
    if (geometry::distance_to_boundary(domain, cert.z) < 2.0 * h) break;
    if (!s.sigma.empty() && !(sigma < s.sigma.back())) continue;
    if (!cert.verify(domain)) fail(ErrorKind::corkscrew, "schedule certificate failed verification");
    s.k.push_back(k);
    s.sigma.push_back(sigma);
    s.certificates.push_back(cert);
  }
  return s;
}

RecoveryResult boundary_recovery(const Mesh& mesh, const geometry::PlanarDomain& domain, const Matrix& lambda1,
                                 const Matrix& lambda2, const ConductivityField& gamma1,
                                 const ConductivityField& gamma2, const RecoverySchedule& schedule) {
  const auto nb = static_cast<Eigen::Index>(mesh.num_boundary());
  require(lambda1.rows() == nb && lambda2.rows() == nb, "DtN size must equal boundary count");
  for (const auto& c : schedule.certificates)
    if (!c.verify(domain)) fail(ErrorKind::corkscrew, "invalid certificate in the recovery schedule");

  RecoveryResult out;
  out.x0 = schedule.x0;
  out.h = mesh.max_edge_length();
  const fem::InteriorSolver s1(mesh, fem::assemble_stiffness(mesh, gamma1));
  const fem::InteriorSolver s2(mesh, fem::assemble_stiffness(mesh, gamma2));
  const Matrix diff = lambda1 - lambda2;

  const auto n = static_cast<std::ptrdiff_t>(schedule.certificates.size());
  std::vector<RecoveryRow> rows(static_cast<std::size_t>(n));
  std::vector<std::string> failure(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& cert = schedule.certificates[i];
    RecoveryRow& row = rows[i];
    row.k = schedule.k[i];
    row.sigma = schedule.sigma[i];
    row.z = cert.z;
    try {
      const SingularProbe p1 = build_singular_probe(s1, domain, gamma1, cert.z);
      const SingularProbe p2 = build_singular_probe(s2, domain, gamma2, cert.z);
      if (!p1.concentrated || !p2.concentrated) {
        failure[i] = "probe at k=" + std::to_string(row.k) + " is not concentrated near its singularity";
        continue;
      }
      row.numerator = p2.trace.dot(diff * p1.trace) / (p1.scale * p2.scale);
      row.denominator = inverse_quartic_integral(domain, cert.z);
      row.q = row.numerator / row.denominator;
    } catch (const Error& e) {
      failure[i] = "probe at k=" + std::to_string(row.k) + " failed: " + e.what();
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (failure[i].empty())
      out.rows.push_back(rows[i]);
    else
      out.warnings.push_back(failure[i]);
  }
  if (out.rows.empty()) fail(ErrorKind::geometry, "no resolvable probe in the recovery schedule");

  std::vector<double> sig, q;
  for (const auto& r : out.rows) {
    sig.push_back(r.sigma);
    q.push_back(r.q);
  }
  out.sigma_max = *std::max_element(sig.begin(), sig.end());
  out.sigma_min = *std::min_element(sig.begin(), sig.end());
  if (out.rows.size() >= 2) {
    const auto fit = stats::linear_fit(sig, q);
    out.estimate = fit.intercept;
    out.slope = fit.slope;
  } else {
    out.estimate = q.front();
    out.warnings.push_back("single schedule entry: estimate is Q_k without extrapolation");
  }
  return out;
}

report::ExperimentReport boundary_stability_curve(const geometry::PlanarDomain& domain,
                                                  const std::vector<ConductivityPair>& pairs, double h) {
  const Mesh mesh = triangulate(domain, h);
  const trace::BoundaryGram gram = trace::assemble_trace_gram(mesh);
  report::ExperimentReport rep;
  rep.kind = "boundary-stability";
  rep.columns = {"pair", "boundary_diff", "lambda_diff", "ratio", "ell", "lip"};
  rep.add_meta("h", report::format_double(h));
  rep.add_meta("vertices", std::to_string(mesh.num_vertices()));
  double c = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pr = pairs[i];
    rep.add_meta("pair" + std::to_string(i), pr.label + " : " + pr.gamma1.to_string() + " | " + pr.gamma2.to_string());
    const auto b1 = measure_bounds(pr.gamma1, mesh, domain);
    const auto b2 = measure_bounds(pr.gamma2, mesh, domain);
    const double lhs = boundary_sup_diff(mesh, pr.gamma1, pr.gamma2);
    const Matrix d = trace::assemble_dtn(mesh, pr.gamma1).lambda - trace::assemble_dtn(mesh, pr.gamma2).lambda;
    const double rhs = trace::operator_norm(d, gram);
    const double ratio = rhs > 0.0 ? lhs / rhs : 0.0;
    if (rhs == 0.0 && lhs > 0.0) rep.warnings.push_back("pair " + std::to_string(i) + " has zero DtN difference");
    c = std::max(c, ratio);
    rep.add_row({static_cast<double>(i), lhs, rhs, ratio, std::min(b1.ell, b2.ell), std::max(b1.lip, b2.lip)});
  }
  rep.add_summary("c", c);
  return rep;
}

DirectStabilityResult direct_stability_experiment(const Mesh& mesh, const std::vector<LabelledPair>& pairs) {
  require(!pairs.empty(), "direct stability needs at least one pair");
  const trace::BoundaryGram gram = trace::assemble_trace_gram(mesh);
  const Matrix lambda_one = trace::assemble_dtn(mesh, ConductivityField::constant(1.0)).lambda;
  auto boundary_values = [&mesh](const ConductivityField& g) {
    Vector v(static_cast<Eigen::Index>(mesh.num_boundary()));
    for (std::size_t k = 0; k < mesh.num_boundary(); ++k) v[k] = g(mesh.vertices[mesh.boundary_indices[k]]);
    return v;
  };

  DirectStabilityResult out;
  std::vector<double> lt, ld;
  for (const auto& pr : pairs) {
    const auto b1 = measure_bounds(pr.gamma1, mesh);
    const auto b2 = measure_bounds(pr.gamma2, mesh);
    const Matrix l1 = trace::assemble_dtn(mesh, pr.gamma1).lambda;
    const Matrix l2 = trace::assemble_dtn(mesh, pr.gamma2).lambda;
    DirectStabilityRow row;
    row.t = pr.t;
    row.gamma_diff = sampled_sup_diff(mesh, pr.gamma1, pr.gamma2);
    row.lambda_diff = trace::operator_norm(l1 - l2, gram);
    row.measured = row.gamma_diff > 0.0 ? row.lambda_diff / row.gamma_diff : 0.0;
    row.formula = (1.0 + b2.sup / b1.ell) * (1.0 + b1.sup / b1.ell + b2.sup / b2.ell);
    row.ratio = row.measured / row.formula;
    const Matrix m1 = l1 - boundary_values(pr.gamma1).asDiagonal() * lambda_one;
    const Matrix m2 = l2 - boundary_values(pr.gamma2).asDiagonal() * lambda_one;
    row.interpolation_diff = trace::operator_norm(m1 - m2, gram);
    out.max_ratio = std::max(out.max_ratio, row.ratio);
    if (row.lambda_diff > 0.0 && pr.t > 0.0) {
      lt.push_back(std::log(pr.t));
      ld.push_back(std::log(row.lambda_diff));
    }
    out.rows.push_back(row);
  }
  if (lt.size() >= 2) {
    const auto fit = stats::linear_fit(lt, ld);
    out.slope = fit.slope;
    out.r2 = fit.r2;
  }
  return out;
}

DirectStabilityResult direct_stability_experiment(const Mesh& mesh, const expr::Expression& eta,
                                                  const std::vector<double>& ts) {
  std::vector<LabelledPair> pairs;
  for (double t : ts) {
    require(t > 0.0, "t must be positive");
    pairs.push_back({t, ConductivityField::from_expression(expr::Expression::constant(1.0) +
                                                           expr::Expression::constant(t) * eta),
                     ConductivityField::constant(1.0)});
  }
  return direct_stability_experiment(mesh, pairs);
}

LogQuotient log_quotient_solve(const Mesh& mesh, const ConductivityField& gamma1, const ConductivityField& gamma2) {
  const Vector sigma = fem::centroid_values(mesh, [&](const Point& p) { return std::sqrt(gamma1(p) * gamma2(p)); });
  if (!(sigma.minCoeff() > 0.0)) fail(ErrorKind::coercivity, "sqrt(gamma1 gamma2) is not elliptic");
  const auto q1 = schrodinger::compute_q(mesh, gamma1);
  const auto q2 = schrodinger::compute_q(mesh, gamma2);
  const Vector m = fem::lumped_mass(mesh);
  Vector load(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    const Point& x = mesh.vertices[v];
    load[v] = -m[v] * 2.0 * std::sqrt(gamma1(x) * gamma2(x)) * (q1.values[v] - q2.values[v]);
  }
  LogQuotient out;
  out.reference = fem::interpolate(mesh, [&](const Point& x) { return std::log(gamma1(x) / gamma2(x)); });
  const fem::InteriorSolver solver(mesh, fem::assemble_stiffness(mesh, sigma));
  out.w = solver.extend(fem::boundary_trace(mesh, out.reference)) +
          solver.solve_zero_trace(fem::restrict_to(load, mesh.interior_indices));
  out.l2_error = fem::l2_norm(mesh, Vector(out.w - out.reference));
  return out;
}

double h_minus_one_norm(const Mesh& mesh, const Vector& v) {
  require(static_cast<std::size_t>(v.size()) == mesh.num_vertices(), "field vector size");
  const fem::H1Forms forms = fem::h1_forms(mesh);
  const fem::InteriorSolver solver(mesh, forms.h1);
  const Vector b = fem::restrict_to(forms.mass.cwiseProduct(v), mesh.interior_indices);
  if (b.size() == 0) return 0.0;
  return std::sqrt(std::max(0.0, b.dot(solver.solve_interior(b))));
}

SchrodingerGap schrodinger_dtn_gap(const Mesh& mesh, const ConductivityField& gamma1,
                                   const ConductivityField& gamma2, const trace::BoundaryGram& gram) {
  const auto b1 = measure_bounds(gamma1, mesh);
  const auto b2 = measure_bounds(gamma2, mesh);
  const Matrix l1 = trace::assemble_dtn(mesh, gamma1).lambda;
  const Matrix l2 = trace::assemble_dtn(mesh, gamma2).lambda;
  const Matrix s1 = schrodinger::assemble_dtn_schrodinger(mesh, schrodinger::compute_q(mesh, gamma1).values).lambda;
  const Matrix s2 = schrodinger::assemble_dtn_schrodinger(mesh, schrodinger::compute_q(mesh, gamma2).values).lambda;
  SchrodingerGap g;
  g.lhs = trace::operator_norm(s1 - s2, gram);
  g.lambda_diff = trace::operator_norm(l1 - l2, gram);
  g.boundary_diff = boundary_sup_diff(mesh, gamma1, gamma2);
  const double ell = std::min(b1.ell, b2.ell);
  const double sup = std::max(b1.sup, b2.sup);
  g.c = std::max(1.0 / ell, std::pow(sup / ell, 1.5) / ell);
  g.rhs = g.c * (g.lambda_diff + g.boundary_diff);
  g.ratio = g.rhs > 0.0 ? g.lhs / g.rhs : 0.0;
  return g;
}

DomainStabilityResult domain_stability_experiment(const Mesh& mesh, const std::vector<LabelledPair>& pairs) {
  const trace::BoundaryGram gram = trace::assemble_trace_gram(mesh);
  DomainStabilityResult out;
  std::vector<double> x, y;
  for (const auto& pr : pairs) {
    DomainStabilityRow row;
    row.t = pr.t;
    try {
      row.gamma_diff = sampled_sup_diff(mesh, pr.gamma1, pr.gamma2);
      const auto gap = schrodinger_dtn_gap(mesh, pr.gamma1, pr.gamma2, gram);
      row.lambda_diff = gap.lambda_diff;
      row.schrodinger_diff = gap.lhs;
      const auto q1 = schrodinger::compute_q(mesh, pr.gamma1);
      const auto q2 = schrodinger::compute_q(mesh, pr.gamma2);
      row.q_diff = h_minus_one_norm(mesh, Vector(q1.values - q2.values));
    } catch (const Error& e) {
      row.ok = false;
      out.warnings.push_back("pair t=" + report::format_double(pr.t) + " failed: " + e.what());
    }
    if (row.ok && row.gamma_diff > 0.0 && row.lambda_diff > 0.0 && row.lambda_diff < 1.0) {
      x.push_back(std::log(std::abs(std::log(row.lambda_diff))));
      y.push_back(std::log(row.gamma_diff));
    }
    out.rows.push_back(row);
  }
  out.fit_points = static_cast<int>(x.size());
  if (x.size() >= 2) {
    const auto fit = stats::linear_fit(x, y);
    out.delta = -fit.slope;
    out.log_c = fit.intercept;
    out.r2 = fit.r2;
  } else {
    out.warnings.push_back("fewer than two usable rows: no modulus fit");
  }
  return out;
}

}  // namespace calderon::inverse
