#include "calderon/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "calderon/error.hpp"

namespace calderon::fem {

Vector centroid_values(const Mesh& mesh, const ConductivityField& gamma) {
  return centroid_values(mesh, [&gamma](const Point& p) { return gamma(p); });
}

Vector centroid_values(const Mesh& mesh, const std::function<double(const Point&)>& coefficient, bool allow_signed) {
  const auto nt = static_cast<std::ptrdiff_t>(mesh.num_triangles());
  Vector c(nt);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < nt; ++t) c[t] = coefficient(mesh.centroid(t));
  for (std::ptrdiff_t t = 0; t < nt; ++t) {
    if (!std::isfinite(c[t])) fail(ErrorKind::ellipticity, "coefficient is not finite at a centroid");
    if (!allow_signed && !(c[t] > 0.0))
      fail(ErrorKind::ellipticity, "conductivity " + std::to_string(c[t]) + " is not positive at a centroid");
  }
  return c;
}

namespace {

using Triplet = Eigen::Triplet<double>;

void local_stiffness(const Mesh& mesh, std::size_t t, double c, Triplet* out) {
  const auto g = mesh.hat_gradients(t);
  const double w = c * mesh.triangle_area(t);
  const auto& tri = mesh.triangles[t];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[3 * i + j] = Triplet(tri[i], tri[j], w * g[i].dot(g[j]));
}

SparseMatrix from_triplets(std::size_t n, const std::vector<Triplet>& triplets) {
  SparseMatrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

}  // namespace

SparseMatrix assemble_stiffness(const Mesh& mesh, const Vector& coefficient) {
  require(static_cast<std::size_t>(coefficient.size()) == mesh.num_triangles(), "one coefficient per triangle");
  const auto nt = static_cast<std::ptrdiff_t>(mesh.num_triangles());
  std::vector<Triplet> triplets(9 * static_cast<std::size_t>(nt));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < nt; ++t) local_stiffness(mesh, t, coefficient[t], &triplets[9 * t]);
  return from_triplets(mesh.num_vertices(), triplets);
}

SparseMatrix assemble_stiffness_serial(const Mesh& mesh, const Vector& coefficient) {
  require(static_cast<std::size_t>(coefficient.size()) == mesh.num_triangles(), "one coefficient per triangle");
  std::vector<Triplet> triplets;
  triplets.reserve(9 * mesh.num_triangles());
  Triplet local[9];
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    local_stiffness(mesh, t, coefficient[t], local);
    triplets.insert(triplets.end(), local, local + 9);
  }
  return from_triplets(mesh.num_vertices(), triplets);
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const ConductivityField& gamma) {
  return assemble_stiffness(mesh, centroid_values(mesh, gamma));
}

Vector lumped_mass(const Mesh& mesh) {
  Vector m = Vector::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double third = mesh.triangle_area(t) / 3.0;
    for (int v : mesh.triangles[t]) m[v] += third;
  }
  return m;
}

SparseMatrix assemble_mass(const Mesh& mesh) {
  const Vector m = lumped_mass(mesh);
  SparseMatrix a(m.size(), m.size());
  a.reserve(Eigen::VectorXi::Constant(m.size(), 1));
  for (Eigen::Index i = 0; i < m.size(); ++i) a.insert(i, i) = m[i];
  a.makeCompressed();
  return a;
}

Blocks split_blocks(const Mesh& mesh, const SparseMatrix& a) {
  const auto ni = static_cast<Eigen::Index>(mesh.num_interior());
  const auto nb = static_cast<Eigen::Index>(mesh.num_boundary());
  std::vector<Triplet> ii, ib, bi, bb;
  for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      const int ri = mesh.interior_slot[it.row()], rb = mesh.boundary_slot[it.row()];
      const int ci = mesh.interior_slot[it.col()], cb = mesh.boundary_slot[it.col()];
      if (ri >= 0 && ci >= 0) ii.emplace_back(ri, ci, it.value());
      if (ri >= 0 && cb >= 0) ib.emplace_back(ri, cb, it.value());
      if (rb >= 0 && ci >= 0) bi.emplace_back(rb, ci, it.value());
      if (rb >= 0 && cb >= 0) bb.emplace_back(rb, cb, it.value());
    }
  }
  auto build = [](Eigen::Index rows, Eigen::Index cols, const std::vector<Triplet>& t) {
    SparseMatrix m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
  };
  return {build(ni, ni, ii), build(ni, nb, ib), build(nb, ni, bi), build(nb, nb, bb)};
}

Vector restrict_to(const Vector& u, std::span<const int> indices) {
  Vector r(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) r[static_cast<Eigen::Index>(k)] = u[indices[k]];
  return r;
}

struct InteriorSolver::Impl {
  Eigen::SimplicialLDLT<SparseMatrix> direct;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> iterative;
  bool use_iterative = false;
};

InteriorSolver::InteriorSolver(const Mesh& mesh, const SparseMatrix& a)
    : mesh_(&mesh), blocks_(split_blocks(mesh, a)), impl_(std::make_unique<Impl>()) {
  if (mesh.num_interior() == 0) return;
  impl_->use_iterative = mesh.num_interior() > kIterativeThreshold;
  if (impl_->use_iterative) {
    impl_->iterative.setTolerance(1e-12);
    impl_->iterative.compute(blocks_.ii);
    if (impl_->iterative.info() != Eigen::Success) fail(ErrorKind::solver, "incomplete Cholesky failed");
  } else {
    impl_->direct.compute(blocks_.ii);
    if (impl_->direct.info() != Eigen::Success) fail(ErrorKind::solver, "sparse LDLT factorization failed");
  }
}

InteriorSolver::~InteriorSolver() = default;
InteriorSolver::InteriorSolver(InteriorSolver&&) noexcept = default;
InteriorSolver& InteriorSolver::operator=(InteriorSolver&&) noexcept = default;

double InteriorSolver::min_pivot() const {
  if (impl_->use_iterative) fail(ErrorKind::capability, "pivot information needs the direct solver");
  if (mesh_->num_interior() == 0) return std::numeric_limits<double>::infinity();
  return impl_->direct.vectorD().minCoeff();
}

Vector InteriorSolver::solve_interior(const Vector& rhs) const {
  require(static_cast<std::size_t>(rhs.size()) == mesh_->num_interior(), "interior right-hand side size");
  if (rhs.size() == 0) return rhs;
  Vector x;
  if (impl_->use_iterative) {
    x = impl_->iterative.solve(rhs);
    if (impl_->iterative.info() != Eigen::Success)
      fail(ErrorKind::solver, "conjugate gradients did not converge (error " +
                                  std::to_string(impl_->iterative.error()) + ")");
  } else {
    x = impl_->direct.solve(rhs);
  }
  if (!x.allFinite()) fail(ErrorKind::solver, "interior solve produced non-finite values");
  return x;
}

Vector InteriorSolver::extend(const Vector& f) const {
  require(static_cast<std::size_t>(f.size()) == mesh_->num_boundary(), "trace size must equal boundary count");
  Vector u(static_cast<Eigen::Index>(mesh_->num_vertices()));
  const Vector ui = solve_interior(-(blocks_.ib * f));
  for (std::size_t k = 0; k < mesh_->num_interior(); ++k) u[mesh_->interior_indices[k]] = ui[k];
  for (std::size_t k = 0; k < mesh_->num_boundary(); ++k) u[mesh_->boundary_indices[k]] = f[k];
  return u;
}

Vector InteriorSolver::solve_zero_trace(const Vector& rhs) const {
  Vector u = Vector::Zero(static_cast<Eigen::Index>(mesh_->num_vertices()));
  const Vector ui = solve_interior(rhs);
  for (std::size_t k = 0; k < mesh_->num_interior(); ++k) u[mesh_->interior_indices[k]] = ui[k];
  return u;
}

H1Forms h1_forms(const Mesh& mesh) {
  H1Forms f;
  f.laplace = assemble_stiffness(mesh, Vector::Ones(static_cast<Eigen::Index>(mesh.num_triangles())));
  f.mass = lumped_mass(mesh);
  f.h1 = f.laplace;
  for (Eigen::Index i = 0; i < f.mass.size(); ++i) f.h1.coeffRef(i, i) += f.mass[i];
  return f;
}

double h1_norm(const H1Forms& f, const Vector& u) { return std::sqrt(std::max(0.0, u.dot(f.h1 * u))); }
double h10_seminorm(const H1Forms& f, const Vector& u) { return std::sqrt(std::max(0.0, u.dot(f.laplace * u))); }
double l2_norm(const H1Forms& f, const Vector& u) { return std::sqrt(u.dot(f.mass.cwiseProduct(u))); }
double h1_norm(const Mesh& mesh, const Vector& u) { return h1_norm(h1_forms(mesh), u); }
double h10_seminorm(const Mesh& mesh, const Vector& u) { return h10_seminorm(h1_forms(mesh), u); }
double l2_norm(const Mesh& mesh, const Vector& u) { return l2_norm(h1_forms(mesh), u); }

Vector interpolate(const Mesh& mesh, const std::function<double(const Point&)>& f) {
  Vector u(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) u[static_cast<Eigen::Index>(v)] = f(mesh.vertices[v]);
  return u;
}

Vector boundary_trace(const Mesh& mesh, const Vector& u) { return restrict_to(u, mesh.boundary_indices); }

Vector solve_dirichlet(const Mesh& mesh, const ConductivityField& gamma, const Vector& f) {
  return InteriorSolver(mesh, assemble_stiffness(mesh, gamma)).extend(f);
}

Vector solve_one_harmonic(const Mesh& mesh, const Vector& f) {
  return InteriorSolver(mesh, h1_forms(mesh).h1).extend(f);
}

LiftedSolution solve_lifted(const Mesh& mesh, const ConductivityField& gamma,
                            const std::function<double(const Point&)>& eta, const Vector& phi) {
  require(static_cast<std::size_t>(phi.size()) == mesh.num_vertices(), "phi must be a field vector");
  if (!phi.allFinite()) fail(ErrorKind::precondition, "phi must be finite");
  const Vector g = centroid_values(mesh, gamma);
  const Vector e = centroid_values(mesh, eta, true);
  const SparseMatrix a_eta = assemble_stiffness(mesh, e);
  InteriorSolver solver(mesh, assemble_stiffness(mesh, g));
  const Vector rhs = restrict_to(a_eta * phi, mesh.interior_indices);
  LiftedSolution s;
  s.u = solver.solve_zero_trace(rhs);
  const H1Forms forms = h1_forms(mesh);
  s.norm = h10_seminorm(forms, s.u);
  s.bound = e.cwiseAbs().maxCoeff() / g.minCoeff() * h10_seminorm(forms, phi);
  return s;
}

}  // namespace calderon::fem
