#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "calderon/harness.hpp"
#include "calderon/inverse.hpp"
#include "calderon/schrodinger.hpp"

namespace calderon::harness {

namespace {

using fem::Matrix;
using fem::Vector;

struct Outcome {
  bool passed;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

struct Fixture {
  geometry::PlanarDomain koch2 = geometry::generate_prefractal({geometry::Generator::koch_snowflake, 2, 1.0});
  geometry::PlanarDomain koch1 = geometry::generate_prefractal({geometry::Generator::koch_snowflake, 1, 1.0});
  geometry::PlanarDomain square = geometry::generate_prefractal({geometry::Generator::square, 0, 1.0});
  Mesh mesh = triangulate(koch2, 0.06);
  trace::BoundaryGram gram = trace::assemble_trace_gram(mesh);
  std::mt19937_64 rng{20240611};

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  Vector random_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(-1.0, 1.0);
    return v;
  }
  expr::Expression random_smooth(double base, double amplitude) {
    std::ostringstream os;
    os.precision(17);
    os << base << " + " << amplitude * uniform(-1.0, 1.0) << " * sin(" << uniform(-3.0, 3.0) << " * x + "
       << uniform(-3.0, 3.0) << " * y + " << uniform(0.0, 6.0) << ")";
    return expr::Expression::parse(os.str());
  }
  ConductivityField random_gamma() { return ConductivityField::from_expression(random_smooth(1.5, 0.5)); }
};

}  // namespace

std::vector<CheckResult> validate_suite(const std::function<void(const CheckResult&)>& on_result) {
  Fixture fx;
  std::vector<CheckResult> results;
  auto run = [&](const std::string& name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r{name, false, "", 0.0};
    try {
      const Outcome o = body();
      r.passed = o.passed;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(r);
    if (on_result) on_result(r);
  };
  const Mesh& mesh = fx.mesh;
  const auto nb = static_cast<Eigen::Index>(mesh.num_boundary());

  run("geometry.n_set", [&] {
    const double radii[] = {0.05, 0.1, 0.2};
    const double c = geometry::verify_n_set(fx.koch2, 64, radii);
    return Outcome{c >= 0.1, "c_Omega = " + fmt(c)};
  });
  run("geometry.corkscrew", [&] {
    double worst = 1.0;
    for (int i = 0; i < 20; ++i) {
      const Point x0 = geometry::boundary_point_at(fx.koch2, fx.koch2.boundary_arclength * i / 20.0);
      for (double r : {0.1, 0.05}) {
        const auto cert = geometry::find_corkscrew_point(fx.koch2, x0, r);
        if (!cert.verify(fx.koch2)) return Outcome{false, "certificate failed verification"};
        worst = std::min(worst, cert.delta);
      }
    }
    return Outcome{worst >= 0.1, "min delta = " + fmt(worst)};
  });
  run("mesh.quality", [&] {
    const bool ok = mesh.min_angle_degrees() >= 20.0 && mesh.max_edge_length() <= 0.06 &&
                    rel(mesh.area(), fx.koch2.area) <= 1e-9;
    return Outcome{ok, "min angle " + fmt(mesh.min_angle_degrees()) + ", max edge " + fmt(mesh.max_edge_length())};
  });
  run("mesh.roundtrip", [&] {
    std::stringstream ss;
    write_mesh(ss, mesh);
    const Mesh back = read_mesh(ss);
    bool ok = back.vertices.size() == mesh.vertices.size() && back.triangles == mesh.triangles &&
              back.boundary_indices == mesh.boundary_indices;
    for (std::size_t i = 0; ok && i < mesh.vertices.size(); ++i) ok = back.vertices[i] == mesh.vertices[i];
    return Outcome{ok, "vertices " + std::to_string(mesh.num_vertices())};
  });
  run("fem.parallel_matches_serial", [&] {
    const Vector c = fem::centroid_values(mesh, fx.random_gamma());
    const Matrix d = Matrix(fem::assemble_stiffness(mesh, c)) - Matrix(fem::assemble_stiffness_serial(mesh, c));
    return Outcome{d.cwiseAbs().maxCoeff() == 0.0, "max difference " + fmt(d.cwiseAbs().maxCoeff())};
  });
  run("fem.stiffness_kernel", [&] {
    const auto a = fem::assemble_stiffness(mesh, fx.random_gamma());
    const Vector ones = Vector::Ones(a.rows());
    const double k = (a * ones).cwiseAbs().maxCoeff() / Matrix(a).cwiseAbs().maxCoeff();
    const double s = Matrix(a - fem::SparseMatrix(a.transpose())).cwiseAbs().maxCoeff();
    return Outcome{k <= 1e-12 && s == 0.0, "A 1 = " + fmt(k) + ", asymmetry " + fmt(s)};
  });
  // Supported well inside the level-1 core, so the pair is constant near the boundary.
  const ConductivityField bump = ConductivityField::radial_bump(Point(0.5, 0.2887), 0.2, 0.5);
  run("dtn.structure", [&] {
    const auto s = trace::check_structure(trace::assemble_dtn(mesh, bump).lambda);
    const bool ok = s.symmetry <= 1e-10 && s.constants <= 1e-10 && s.min_eigenvalue >= -1e-10;
    return Outcome{ok, "symmetry " + fmt(s.symmetry) + ", constants " + fmt(s.constants) + ", min eigenvalue " +
                           fmt(s.min_eigenvalue)};
  });
  run("dtn.energy", [&] {
    const Matrix lambda = trace::assemble_dtn(mesh, bump).lambda;
    const auto a = fem::assemble_stiffness(mesh, bump);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Vector f = fx.random_vector(nb);
      const Vector u = fem::solve_dirichlet(mesh, bump, f);
      worst = std::max(worst, rel(f.dot(lambda * f), u.dot(a * u)));
    }
    return Outcome{worst <= 1e-9, "max relative gap " + fmt(worst)};
  });
  run("dtn.alessandrini", [&] {
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const auto s = trace::alessandrini_identity(mesh, fx.random_gamma(), fx.random_gamma(), fx.random_vector(nb),
                                                  fx.random_vector(nb));
      worst = std::max(worst, std::abs(s.lhs - s.rhs) / (std::abs(s.lhs) + std::abs(s.rhs) + 1.0));
    }
    return Outcome{worst <= 1e-9, "max scaled gap " + fmt(worst)};
  });
  run("trace.inequality", [&] {
    const auto forms = fem::h1_forms(mesh);
    bool ok = true;
    double equality = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Vector u = fx.random_vector(static_cast<Eigen::Index>(mesh.num_vertices()));
      ok = ok && fx.gram.norm(fem::boundary_trace(mesh, u)) <= fem::h1_norm(forms, u) * (1.0 + 1e-9);
      const Vector f = fx.random_vector(nb);
      equality = std::max(equality, rel(fx.gram.norm(f), fem::h1_norm(forms, fem::solve_one_harmonic(mesh, f))));
    }
    return Outcome{ok && equality <= 1e-9, "equality gap " + fmt(equality)};
  });
  run("trace.normal_derivative_isometry", [&] {
    const auto forms = fem::h1_forms(mesh);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Vector v = fem::solve_one_harmonic(mesh, fx.random_vector(nb));
      const Vector g = trace::weak_normal_derivative(mesh, forms.h1, v);
      worst = std::max(worst, rel(trace::dual_norm(g, fx.gram), fem::h1_norm(forms, v)));
    }
    return Outcome{worst <= 1e-9, "max relative gap " + fmt(worst)};
  });
  run("trace.modulation", [&] {
    int violations = 0;
    for (int i = 0; i < 20; ++i) {
      const auto phi = fx.random_smooth(0.0, 2.0);
      const auto a = trace::modulated_trace_norm_check(mesh, fx.gram, phi, fx.random_vector(nb));
      const auto b = trace::modulated_dual_norm_check(mesh, fx.gram, phi, fx.random_vector(nb));
      violations += (a.lhs > a.rhs) + (b.lhs > b.rhs);
    }
    return Outcome{violations == 0, std::to_string(violations) + " violations"};
  });
  run("trace.power_iteration", [&] {
    const Matrix d = trace::assemble_dtn(mesh, bump).lambda - trace::assemble_dtn(mesh, ConductivityField::constant(1.0)).lambda;
    const double p = trace::operator_norm(d, fx.gram);
    const double e = trace::operator_norm_dense(d, fx.gram);
    return Outcome{rel(p, e) <= 1e-6, "power " + fmt(p) + " vs dense " + fmt(e)};
  });
  run("schrodinger.constant_exact", [&] {
    const auto g = ConductivityField::constant(2.5);
    const double r = schrodinger::equivalence_residual(mesh, g, fx.random_vector(nb));
    const double c = schrodinger::conjugation_check(mesh, g, fx.gram);
    return Outcome{r <= 1e-10 && c <= 1e-10, "residual " + fmt(r) + ", conjugation " + fmt(c)};
  });
  run("schrodinger.cgo_solve", [&] {
    const auto g = ConductivityField::radial_bump(Point(0.5, 0.2887), 0.25, 0.03);
    const auto rep = schrodinger::cgo_decay_experiment(fx.koch1, g, {1.0, 2.0, 5.0, 10.0}, {0.05, 0.0});
    double worst = 0.0;
    for (const auto& row : rep.rows) worst = std::max(worst, row.residual);
    const auto zero = schrodinger::cgo_decay_experiment(fx.koch1, ConductivityField::constant(3.0),
                                                        {1.0, 2.0, 5.0, 10.0}, {0.05, 0.0});
    return Outcome{worst <= 1e-10 && zero.degenerate, "max residual " + fmt(worst)};
  });
  run("inverse.probe", [&] {
    const Mesh sq = triangulate(fx.square, 0.05);
    const Point z(0.5, -0.2);
    const auto p1 = inverse::build_singular_probe(sq, fx.square, ConductivityField::constant(1.0), z);
    const auto p3 = inverse::build_singular_probe(sq, fx.square, ConductivityField::constant(3.0), z);
    const double homogeneity = (p3.u - p1.u / 3.0).cwiseAbs().maxCoeff() / p1.u.cwiseAbs().maxCoeff();
    const bool ok = p1.residual <= 1e-9 && p1.concentrated && homogeneity <= 1e-12;
    return Outcome{ok, "residual " + fmt(p1.residual) + ", homogeneity " + fmt(homogeneity)};
  });
  run("inverse.recovery_constant", [&] {
    const Mesh sq = triangulate(fx.square, 0.04);
    const auto g1 = ConductivityField::constant(1.1);
    const auto g2 = ConductivityField::constant(1.0);
    const auto r = inverse::boundary_recovery(sq, fx.square, trace::assemble_dtn(sq, g1).lambda,
                                              trace::assemble_dtn(sq, g2).lambda, g1, g2,
                                              inverse::make_schedule(fx.square, Point(0.5, 0.0), sq.max_edge_length()));
    return Outcome{std::abs(r.estimate - 0.1) <= 0.02, "estimate " + fmt(r.estimate)};
  });
  run("inverse.log_quotient_constants", [&] {
    const auto lq = inverse::log_quotient_solve(mesh, ConductivityField::constant(2.0), ConductivityField::constant(0.5));
    const double err = (lq.w.array() - std::log(4.0)).abs().maxCoeff();
    return Outcome{err <= 1e-10, "max deviation " + fmt(err)};
  });
  run("inverse.schrodinger_gap", [&] {
    // q must be resolved for the discrete conjugation to hold; h = 0.06 is too coarse.
    const Mesh fine = triangulate(fx.koch2, 0.015);
    const auto g = inverse::schrodinger_dtn_gap(fine, ConductivityField::radial_bump(Point(0.5, 0.2887), 0.25, 0.5),
                                                ConductivityField::constant(1.0), trace::assemble_trace_gram(fine));
    return Outcome{g.lhs <= g.rhs, "ratio " + fmt(g.ratio)};
  });
  run("harness.config_contract", [&] {
    bool unknown = false, parse = false;
    try {
      parse_config_text("experiment = dtn\ncolour = blue\n");
    } catch (const Error& e) {
      unknown = e.kind() == ErrorKind::config;
    }
    try {
      auto c = parse_config_text("experiment = dtn\ngamma = 1 + * x\n");
      validate_config(c);
    } catch (const Error& e) {
      parse = e.kind() == ErrorKind::parse;
    }
    return Outcome{unknown && parse, "unknown key rejected, malformed expression is a parse error"};
  });
  return results;
}

}  // namespace calderon::harness
