// Acceptance battery: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "calderon/harness.hpp"
#include "calderon/inverse.hpp"
#include "calderon/parallel.hpp"
#include "calderon/schrodinger.hpp"
#include "calderon/stats.hpp"

namespace {

using namespace calderon;
using fem::Matrix;
using fem::Vector;

struct Verdict {
  bool passed = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

const Point kCentre(0.5, 0.28867513459481287);  // centroid of the unit snowflake

struct Random {
  std::mt19937_64 rng{20240611};
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  Vector vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(-1.0, 1.0);
    return v;
  }
  expr::Expression smooth(double base, double amplitude) {
    std::ostringstream os;
    os.precision(17);
    os << base << " + " << amplitude * uniform(-1.0, 1.0) << " * sin(" << uniform(-4.0, 4.0) << " * x + "
       << uniform(-4.0, 4.0) << " * y + " << uniform(0.0, 6.3) << ")";
    return expr::Expression::parse(os.str());
  }
  ConductivityField gamma() { return ConductivityField::from_expression(smooth(1.5, 0.9)); }
};

geometry::PlanarDomain domain(const std::string& spec) {
  return geometry::generate_prefractal(geometry::parse_domain_spec(spec));
}

Verdict alessandrini() {
  Random rnd;
  const Mesh mesh = triangulate(domain("koch:2:1"), 0.03);
  const auto nb = static_cast<Eigen::Index>(mesh.num_boundary());
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto g1 = rnd.gamma();
    const auto g2 = rnd.gamma();
    const auto s = trace::alessandrini_identity(mesh, g1, g2, rnd.vector(nb), rnd.vector(nb));
    worst = std::max(worst, std::abs(s.lhs - s.rhs) / (std::abs(s.lhs) + std::abs(s.rhs) + 1.0));
  }
  return {worst <= 1e-9, "50 draws, max |lhs-rhs|/(|lhs|+|rhs|+1) = " + fmt(worst)};
}

Verdict dtn_structure() {
  Random rnd;
  const Mesh mesh = triangulate(domain("koch:2:1"), 0.03);
  std::vector<ConductivityField> fields = {ConductivityField::constant(1.0), ConductivityField::constant(3.7),
                                           ConductivityField::radial_bump(kCentre, 0.25, 0.5)};
  for (int i = 0; i < 10; ++i) fields.push_back(rnd.gamma());
  double sym = 0.0, cons = 0.0, mineig = 1.0;
  for (const auto& g : fields) {
    const auto s = trace::check_structure(trace::assemble_dtn(mesh, g).lambda);
    sym = std::max(sym, s.symmetry);
    cons = std::max(cons, s.constants);
    mineig = std::min(mineig, s.min_eigenvalue);
  }
  return {sym <= 1e-10 && cons <= 1e-10 && mineig >= 0.0,
          std::to_string(fields.size()) + " operators, symmetry " + fmt(sym) + ", constants " + fmt(cons) +
              ", min eigenvalue off constants " + fmt(mineig)};
}

Verdict trace_theorem() {
  Random rnd;
  const Mesh mesh = triangulate(domain("koch:2:1"), 0.03);
  const auto gram = trace::assemble_trace_gram(mesh);
  const auto forms = fem::h1_forms(mesh);
  const auto nb = static_cast<Eigen::Index>(mesh.num_boundary());
  const auto nv = static_cast<Eigen::Index>(mesh.num_vertices());
  int violations = 0;
  double equality = 0.0, isometry = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector u = rnd.vector(nv);
    violations += gram.norm(fem::boundary_trace(mesh, u)) > fem::h1_norm(forms, u) + 1e-9;
    const Vector e = fem::solve_one_harmonic(mesh, rnd.vector(nb));
    equality = std::max(equality, rel(gram.norm(fem::boundary_trace(mesh, e)), fem::h1_norm(forms, e)));
  }
  for (int i = 0; i < 20; ++i) {
    const Vector v = fem::solve_one_harmonic(mesh, rnd.vector(nb));
    const Vector g = trace::weak_normal_derivative(mesh, forms.h1, v);
    isometry = std::max(isometry, rel(trace::dual_norm(g, gram), fem::h1_norm(forms, v)));
  }
  return {violations == 0 && equality <= 1e-9 && isometry <= 1e-9,
          std::to_string(violations) + " inequality violations in 100, equality gap " + fmt(equality) +
              ", isometry gap " + fmt(isometry)};
}

Verdict modulation() {
  Random rnd;
  const Mesh mesh = triangulate(domain("koch:2:1"), 0.03);
  const auto gram = trace::assemble_trace_gram(mesh);
  const auto nb = static_cast<Eigen::Index>(mesh.num_boundary());
  int violations = 0;
  double tightest = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto phi = rnd.smooth(rnd.uniform(-1.0, 1.0), 2.0);
    const auto a = trace::modulated_trace_norm_check(mesh, gram, phi, rnd.vector(nb));
    const auto b = trace::modulated_dual_norm_check(mesh, gram, phi, rnd.vector(nb));
    violations += (a.lhs > a.rhs) + (b.lhs > b.rhs);
    tightest = std::max({tightest, a.lhs / a.rhs, b.lhs / b.rhs});
  }
  return {violations == 0, "100 pairs (trace and dual forms), " + std::to_string(violations) +
                               " violations, max lhs/rhs " + fmt(tightest)};
}

Verdict direct_stability() {
  const Mesh mesh = triangulate(domain("koch:2:1"), 0.03);
  const auto eta = expr::Expression::parse("bump(((x-0.5)^2+(y-0.28867513459481287)^2)/0.0625)");
  const auto r = inverse::direct_stability_experiment(mesh, eta, {0.025, 0.05, 0.1, 0.2});
  return {std::abs(r.slope - 1.0) <= 0.1 && r.max_ratio <= 1.0,
          "slope " + fmt(r.slope) + " (R2 " + fmt(r.r2) + "), max measured/formula constant " + fmt(r.max_ratio)};
}

Verdict boundary_recovery() {
  const auto sq = domain("square");
  const Mesh mesh = triangulate(sq, 0.01);
  const double h = mesh.max_edge_length();
  const auto g1 = ConductivityField::constant(1.1);
  const auto one = ConductivityField::constant(1.0);
  const Matrix l1 = trace::assemble_dtn(mesh, one).lambda;
  const auto schedule = inverse::make_schedule(sq, Point(0.5, 0.0), h);
  const auto r = inverse::boundary_recovery(mesh, sq, trace::assemble_dtn(mesh, g1).lambda, l1, g1, one, schedule);
  // Localization: a bump centred on the bottom edge, probed at the top edge.
  const auto bump = ConductivityField::radial_bump(Point(0.5, 0.0), 0.25, 0.1);
  const auto far = inverse::boundary_recovery(mesh, sq, trace::assemble_dtn(mesh, bump).lambda, l1, bump, one,
                                              inverse::make_schedule(sq, Point(0.5, 1.0), h));
  const bool ok = std::abs(r.estimate - 0.1) <= 0.02 && std::abs(far.estimate) <= 0.01;
  return {ok, "estimate " + fmt(r.estimate) + " for 0.1 over sigma in [" + fmt(r.sigma_min) + ", " +
                  fmt(r.sigma_max) + "] at h " + fmt(h) + "; far-point estimate " + fmt(far.estimate)};
}

Verdict schrodinger_equivalence() {
  const auto dom = domain("koch:2:1");
  const auto gamma = ConductivityField::radial_bump(kCentre, 0.25, 0.5);
  const auto trace_fn = [](const Point& p) { return std::cos(2.0 * p.x()) + p.y() * p.y(); };
  std::vector<double> lh, lr, lc;
  std::string detail;
  for (double h : {0.08, 0.04, 0.02, 0.01}) {
    const Mesh mesh = triangulate(dom, h);
    const Vector f = fem::boundary_trace(mesh, fem::interpolate(mesh, trace_fn));
    const double r = schrodinger::equivalence_residual(mesh, gamma, f);
    const double c = schrodinger::conjugation_check(mesh, gamma);
    lh.push_back(std::log(h));
    lr.push_back(std::log(r));
    lc.push_back(std::log(c));
    detail += "h " + fmt(h) + ": " + fmt(r) + "/" + fmt(c) + "; ";
  }
  const double sr = stats::linear_fit(lh, lr).slope;
  const double sc = stats::linear_fit(lh, lc).slope;
  const Mesh coarse = triangulate(dom, 0.04);
  const auto cst = ConductivityField::constant(2.5);
  const Vector f = fem::boundary_trace(coarse, fem::interpolate(coarse, trace_fn));
  const double er = schrodinger::equivalence_residual(coarse, cst, f);
  const double ec = schrodinger::conjugation_check(coarse, cst);
  const bool ok = sr >= 0.8 && sc >= 0.8 && er <= 1e-10 && ec <= 1e-10;
  return {ok, "residual/conjugation " + detail + "slopes " + fmt(sr) + " / " + fmt(sc) + "; constant gamma " +
                  fmt(er) + " / " + fmt(ec)};
}

Verdict cgo_decay() {
  const auto gamma = ConductivityField::radial_bump(kCentre, 0.25, 0.03);
  const auto r = schrodinger::cgo_decay_experiment(domain("koch:1:1"), gamma, {0.5, 1, 2, 5, 10, 20, 40},
                                                   {0.0125, 0.0});
  double worst = 0.0;
  for (const auto& row : r.rows) worst = std::max(worst, row.residual);
  const bool ok = r.slope >= -1.3 && r.slope <= -0.7 && r.plateau <= 10.0 && r.fit_points >= 4 && worst <= 1e-8;
  return {ok, "||q||_inf " + fmt(r.q_sup) + ", slope " + fmt(r.slope) + " over " + std::to_string(r.fit_points) +
                  " points, plateau constant " + fmt(r.plateau) + ", max residual " + fmt(worst)};
}

Verdict domain_stability() {
  const Mesh mesh = triangulate(domain("koch:2:1"), 0.03);
  const auto eta = expr::Expression::parse("bump(((x-0.5)^2+(y-0.28867513459481287)^2)/0.0625)");
  std::vector<inverse::LabelledPair> pairs;
  for (double t : {0.4, 0.2, 0.1, 0.05})
    pairs.push_back({t,
                     ConductivityField::from_expression(expr::Expression::constant(1.0) +
                                                        expr::Expression::constant(t) * eta),
                     ConductivityField::constant(1.0)});
  const auto r = inverse::domain_stability_experiment(mesh, pairs);
  return {r.delta > 0.0 && r.r2 >= 0.9 && r.fit_points == 4,
          "delta " + fmt(r.delta) + ", R2 " + fmt(r.r2) + " over " + std::to_string(r.fit_points) + " pairs"};
}

Verdict geometry_hypotheses() {
  const auto dom = domain("koch:2:1");
  const double radii[] = {0.02, 0.05, 0.1, 0.2};
  const double c = geometry::verify_n_set(dom, 200, radii);
  double delta = 1.0;
  for (int i = 0; i < 20; ++i) {
    const Point x0 = geometry::boundary_point_at(dom, dom.boundary_arclength * (i + 0.37) / 20.0);
    for (double r : {0.1, 0.05}) {
      const auto cert = geometry::find_corkscrew_point(dom, x0, r);
      if (!cert.verify(dom)) return {false, "certificate failed verification"};
      delta = std::min(delta, cert.delta);
    }
  }
  return {c >= 0.1 && delta >= 0.1, "c_Omega " + fmt(c) + ", min corkscrew delta " + fmt(delta) + " over 40 cases"};
}

Verdict validate_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  int failed = 0;
  std::string names;
  const auto results = harness::validate_suite();
  for (const auto& r : results)
    if (!r.passed) {
      ++failed;
      names += " " + r.name;
    }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {failed == 0 && s <= 300.0, std::to_string(results.size()) + " checks, " + std::to_string(failed) +
                                         " failed" + names + ", " + fmt(s) + " s"};
}

}  // namespace

int main() {
  calderon::parallel::configure_from_environment();
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"discrete Alessandrini identity", alessandrini},
      {"DtN symmetry, constants, positivity", dtn_structure},
      {"discrete trace theorem and isometry", trace_theorem},
      {"modulation bounds", modulation},
      {"direct stability", direct_stability},
      {"boundary recovery", boundary_recovery},
      {"Schrodinger equivalence and conjugation", schrodinger_equivalence},
      {"CGO remainder decay", cgo_decay},
      {"domain-stability modulus", domain_stability},
      {"geometry hypotheses", geometry_hypotheses},
      {"validate suite", validate_suite},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !v.passed;
    std::printf("%s criterion %zu (%s): %s [%.1f s]\n", v.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str(), s);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
