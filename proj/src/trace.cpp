#include "calderon/trace.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "calderon/error.hpp"

namespace calderon::trace {

namespace {

std::atomic<Fault> g_fault{Fault::none};

Matrix schur_impl(const fem::InteriorSolver& solver, bool parallel) {
  const fem::Blocks& b = solver.blocks();
  const Eigen::Index nb = b.bb.cols();
  Matrix s = Matrix(b.bb);
  if (b.ii.rows() == 0) return s;
  const double sign = g_fault.load() == Fault::dtn_sign ? -1.0 : 1.0;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (Eigen::Index j = 0; j < nb; ++j) {
    const Vector rhs = Vector(b.ib.col(j));
    const Vector x = solver.solve_interior(rhs);
    s.col(j) -= sign * (b.bi * x);
  }
  return s;
}

}  // namespace

void inject_fault(Fault fault) { g_fault.store(fault); }
Fault injected_fault() { return g_fault.load(); }

Matrix schur_complement(const fem::InteriorSolver& solver) { return schur_impl(solver, true); }
Matrix schur_complement_serial(const fem::InteriorSolver& solver) { return schur_impl(solver, false); }

BoundaryGram::BoundaryGram(Matrix s) : s_(std::move(s)), llt_(s_) {
  if (llt_.info() != Eigen::Success) fail(ErrorKind::solver, "boundary Gram matrix is not positive definite");
}

double BoundaryGram::norm(const Vector& f) const { return std::sqrt(std::max(0.0, f.dot(s_ * f))); }

double BoundaryGram::dual_norm(const Vector& g) const {
  require(g.size() == s_.rows(), "functional size must equal boundary count");
  return std::sqrt(std::max(0.0, g.dot(llt_.solve(g))));
}

Vector BoundaryGram::solve(const Vector& g) const { return llt_.solve(g); }
Matrix BoundaryGram::solve(const Matrix& g) const { return llt_.solve(g); }

BoundaryGram assemble_trace_gram(const Mesh& mesh) {
  const fem::InteriorSolver solver(mesh, fem::h1_forms(mesh).h1);
  // Bypass the fault switch: the Gram is not a DtN map.
  const fem::Blocks& b = solver.blocks();
  Matrix s = Matrix(b.bb);
  if (b.ii.rows() > 0) {
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index j = 0; j < b.bb.cols(); ++j) s.col(j) -= b.bi * solver.solve_interior(Vector(b.ib.col(j)));
  }
  return BoundaryGram(std::move(s));
}

DtNOperator assemble_dtn(const fem::InteriorSolver& solver, std::string description) {
  return {schur_complement(solver), std::move(description)};
}

DtNOperator assemble_dtn(const Mesh& mesh, const ConductivityField& gamma) {
  const fem::InteriorSolver solver(mesh, fem::assemble_stiffness(mesh, gamma));
  return assemble_dtn(solver, gamma.to_string());
}

Vector weak_normal_derivative(const Mesh& mesh, const SparseMatrix& a, const Vector& u,
                              const std::optional<Vector>& divergence) {
  require(static_cast<std::size_t>(u.size()) == mesh.num_vertices(), "u must be a field vector");
  Vector r = a * u;
  if (divergence) {
    require(divergence->size() == u.size(), "divergence must be a field vector");
    r += fem::lumped_mass(mesh).cwiseProduct(*divergence);
  }
  return fem::restrict_to(r, mesh.boundary_indices);
}

Vector weak_normal_derivative(const Mesh& mesh, const ConductivityField& gamma, const Vector& u) {
  return weak_normal_derivative(mesh, fem::assemble_stiffness(mesh, gamma), u);
}

double dual_norm(const Vector& g, const BoundaryGram& gram) { return gram.dual_norm(g); }

double operator_norm(const Matrix& d, const BoundaryGram& gram, const PowerIterationOptions& options) {
  const Eigen::Index n = gram.size();
  require(d.rows() == n && d.cols() == n, "operator size must equal boundary count");
  if (d.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  // Block power iteration with Rayleigh-Ritz: clustered top eigenvalues of
  // S^-1 D^T S^-1 D would stall a single vector.
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Matrix x(n, std::min<Eigen::Index>(kPowerBlock, n));
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = uniform(rng);
  double previous = -1.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    // S-orthonormalise the block, dropping directions that have collapsed.
    Eigen::SelfAdjointEigenSolver<Matrix> g(x.transpose() * gram.matrix() * x);
    const double top = g.eigenvalues().maxCoeff();
    if (!(top > 0.0)) return 0.0;
    Eigen::Index keep = 0;
    for (Eigen::Index k = 0; k < g.eigenvalues().size(); ++k) keep += g.eigenvalues()[k] > 1e-14 * top;
    x = x * g.eigenvectors().rightCols(keep) *
        g.eigenvalues().tail(keep).cwiseSqrt().cwiseInverse().asDiagonal();
    const Matrix dx = d * x;
    const Matrix z = gram.solve(dx);
    const Matrix h = dx.transpose() * z;  // X^T D^T S^-1 D X
    Eigen::SelfAdjointEigenSolver<Matrix> ritz(0.5 * (h + h.transpose()), Eigen::EigenvaluesOnly);
    const double estimate = std::sqrt(std::max(0.0, ritz.eigenvalues().maxCoeff()));
    if (previous >= 0.0 && std::abs(estimate - previous) <= options.tolerance * estimate) return estimate;
    previous = estimate;
    x = gram.solve(Matrix(d.transpose() * z));
  }
  fail(ErrorKind::iteration, "operator norm power iteration did not converge in " +
                                 std::to_string(options.max_iterations) + " iterations");
}

double operator_norm_diff(const DtNOperator& a, const DtNOperator& b, const BoundaryGram& gram,
                          const PowerIterationOptions& options) {
  return operator_norm(a.lambda - b.lambda, gram, options);
}

double operator_norm_dense(const Matrix& d, const BoundaryGram& gram) {
  const Matrix a = d.transpose() * gram.solve(d);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()), gram.matrix(),
                                                       Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

IdentitySides alessandrini_identity(const Mesh& mesh, const ConductivityField& gamma1,
                                    const ConductivityField& gamma2, const Vector& f1, const Vector& f2) {
  const Vector c1 = fem::centroid_values(mesh, gamma1);
  const Vector c2 = fem::centroid_values(mesh, gamma2);
  const SparseMatrix a1 = fem::assemble_stiffness(mesh, c1);
  const SparseMatrix a2 = fem::assemble_stiffness(mesh, c2);
  const fem::InteriorSolver s1(mesh, a1);
  const fem::InteriorSolver s2(mesh, a2);
  const Vector u1 = s1.extend(f1);  // gamma1 extension of f1
  const Vector w1 = s2.extend(f1);  // gamma2 extension of f1
  const Vector u2 = s2.extend(f2);  // gamma2 extension of f2
  IdentitySides sides;
  sides.lhs = f2.dot(fem::restrict_to(a1 * u1, mesh.boundary_indices)) -
              f2.dot(fem::restrict_to(a2 * w1, mesh.boundary_indices));
  double rhs = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = mesh.hat_gradients(t);
    const auto& tri = mesh.triangles[t];
    Point grad1 = Point::Zero(), grad2 = Point::Zero();
    for (int i = 0; i < 3; ++i) {
      grad1 += u1[tri[i]] * g[i];
      grad2 += u2[tri[i]] * g[i];
    }
    rhs += (c1[t] - c2[t]) * grad1.dot(grad2) * mesh.triangle_area(t);
  }
  sides.rhs = rhs;
  return sides;
}

double sampled_w1inf(const Mesh& mesh, const expr::Expression& phi) {
  const expr::Expression dx = phi.derivative(expr::Var::x);
  const expr::Expression dy = phi.derivative(expr::Var::y);
  double best = 0.0;
  auto sample = [&](const Point& p) {
    best = std::max({best, std::abs(phi(p.x(), p.y())), std::hypot(dx(p.x(), p.y()), dy(p.x(), p.y()))});
  };
  for (const Point& p : mesh.vertices) sample(p);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) sample(mesh.centroid(t));
  return best;
}

namespace {

Vector boundary_values(const Mesh& mesh, const expr::Expression& phi) {
  Vector v(static_cast<Eigen::Index>(mesh.num_boundary()));
  for (std::size_t k = 0; k < mesh.num_boundary(); ++k) {
    const Point& p = mesh.vertices[mesh.boundary_indices[k]];
    v[static_cast<Eigen::Index>(k)] = phi(p.x(), p.y());
  }
  return v;
}

}  // namespace

ModulationCheck modulated_trace_norm_check(const Mesh& mesh, const BoundaryGram& gram, const expr::Expression& phi,
                                           const Vector& f) {
  ModulationCheck c;
  c.phi_w1inf = sampled_w1inf(mesh, phi);
  c.lhs = gram.norm(boundary_values(mesh, phi).cwiseProduct(f));
  c.rhs = std::sqrt(2.0) * c.phi_w1inf * gram.norm(f);
  return c;
}

ModulationCheck modulated_dual_norm_check(const Mesh& mesh, const BoundaryGram& gram, const expr::Expression& phi,
                                          const Vector& g) {
  ModulationCheck c;
  c.phi_w1inf = sampled_w1inf(mesh, phi);
  c.lhs = gram.dual_norm(boundary_values(mesh, phi).cwiseProduct(g));
  c.rhs = std::sqrt(2.0) * c.phi_w1inf * gram.dual_norm(g);
  return c;
}

DtNStructure check_structure(const Matrix& lambda) {
  const Eigen::Index n = lambda.rows();
  require(n > 1 && lambda.cols() == n, "DtN matrix must be square");
  DtNStructure s;
  const double max_entry = lambda.cwiseAbs().maxCoeff();
  if (max_entry == 0.0) return s;
  s.symmetry = (lambda - lambda.transpose()).cwiseAbs().maxCoeff() / max_entry;
  const Matrix sym = 0.5 * (lambda + lambda.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> full(sym, Eigen::EigenvaluesOnly);
  const double spectral = full.eigenvalues().cwiseAbs().maxCoeff();
  const Vector ones = Vector::Ones(n);
  s.constants = (lambda * ones).norm() / (spectral * std::sqrt(static_cast<double>(n)));
  // Restrict to the orthogonal complement of constants.
  const Matrix p = Matrix::Identity(n, n) - ones * ones.transpose() / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> comp(p * sym * p, Eigen::EigenvaluesOnly);
  // The projector adds one zero eigenvalue (the constants); drop the one of
  // smallest magnitude.
  Vector ev = comp.eigenvalues();
  Eigen::Index zero_at = 0;
  ev.cwiseAbs().minCoeff(&zero_at);
  double min_ev = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != zero_at) min_ev = std::min(min_ev, ev[i]);
  s.min_eigenvalue = min_ev / spectral;
  return s;
}

void write_dense_csv(std::ostream& os, const Matrix& m) {
  os << "# calderon-dtn v1, n=" << m.rows() << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
    os << '\n';
  }
}

Matrix read_dense_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# calderon-dtn v1, n=", 0) != 0)
    fail(ErrorKind::parse, "missing `# calderon-dtn v1` header");
  long n = 0;
  try {
    n = std::stol(line.substr(line.find("n=") + 2));
  } catch (const std::exception&) {
    fail(ErrorKind::parse, "bad dimension in DtN header");
  }
  if (n <= 0) fail(ErrorKind::parse, "DtN dimension must be positive");
  Matrix m(n, n);
  for (long i = 0; i < n; ++i) {
    if (!std::getline(is, line)) fail(ErrorKind::parse, "truncated DtN matrix");
    std::stringstream row(line);
    std::string cell;
    for (long j = 0; j < n; ++j) {
      if (!std::getline(row, cell, ',')) fail(ErrorKind::parse, "short DtN row");
      try {
        m(i, j) = std::stod(cell);
      } catch (const std::exception&) {
        fail(ErrorKind::parse, "bad DtN entry `" + cell + "`");
      }
    }
  }
  return m;
}

}  // namespace calderon::trace
