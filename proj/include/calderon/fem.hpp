#pragma once

#include <functional>
#include <memory>
#include <span>

#include <Eigen/Sparse>

#include "calderon/conductivity.hpp"
#include "calderon/mesh.hpp"

namespace calderon::fem {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Coefficient sampled at triangle centroids. Raises an ellipticity error on
/// a non-positive sample unless `allow_signed` is set.
Vector centroid_values(const Mesh& mesh, const ConductivityField& gamma);
Vector centroid_values(const Mesh& mesh, const std::function<double(const Point&)>& coefficient,
                       bool allow_signed = false);

/// A[i][j] = sum_T c_T grad(phi_i) . grad(phi_j) |T|. Per-triangle blocks are
/// written to fixed slots and summed in triangle order, so the parallel and
/// serial variants agree bit for bit.
SparseMatrix assemble_stiffness(const Mesh& mesh, const Vector& coefficient_per_triangle);
SparseMatrix assemble_stiffness_serial(const Mesh& mesh, const Vector& coefficient_per_triangle);
SparseMatrix assemble_stiffness(const Mesh& mesh, const ConductivityField& gamma);

/// Lumped (vertex quadrature) mass: diagonal with |T|/3 per incident triangle.
Vector lumped_mass(const Mesh& mesh);
SparseMatrix assemble_mass(const Mesh& mesh);

/// Interior/boundary blocks of a vertex matrix; rows and columns follow
/// mesh.interior_indices and mesh.boundary_indices.
struct Blocks {
  SparseMatrix ii, ib, bi, bb;
};
Blocks split_blocks(const Mesh& mesh, const SparseMatrix& a);

Vector restrict_to(const Vector& u, std::span<const int> indices);

/// Factorized interior block of a symmetric vertex matrix. Sparse LDLT by
/// default, conjugate gradients (rel. 1e-12) above `kIterativeThreshold` dofs.
class InteriorSolver {
 public:
  static constexpr std::size_t kIterativeThreshold = 200000;

  InteriorSolver(const Mesh& mesh, const SparseMatrix& a);
  ~InteriorSolver();
  InteriorSolver(InteriorSolver&&) noexcept;
  InteriorSolver& operator=(InteriorSolver&&) noexcept;

  /// Field equal to f on the boundary with zero interior residual.
  Vector extend(const Vector& boundary_values) const;
  /// Field vanishing on the boundary with interior rows A_ii u_i = rhs.
  Vector solve_zero_trace(const Vector& interior_rhs) const;
  Vector solve_interior(const Vector& interior_rhs) const;

  /// Minimal eigenvalue sign information from the LDLT pivots (direct path only).
  double min_pivot() const;

  const Blocks& blocks() const { return blocks_; }
  const Mesh& mesh() const { return *mesh_; }

 private:
  struct Impl;
  const Mesh* mesh_;
  Blocks blocks_;
  std::unique_ptr<Impl> impl_;
};

/// Cached H^1 forms of a mesh: A1 (Laplace), lumped M, K = A1 + M.
struct H1Forms {
  SparseMatrix laplace;
  Vector mass;
  SparseMatrix h1;
};
H1Forms h1_forms(const Mesh& mesh);

double h1_norm(const H1Forms& forms, const Vector& u);
double h10_seminorm(const H1Forms& forms, const Vector& u);
double l2_norm(const H1Forms& forms, const Vector& u);
double h1_norm(const Mesh& mesh, const Vector& u);
double h10_seminorm(const Mesh& mesh, const Vector& u);
double l2_norm(const Mesh& mesh, const Vector& u);

Vector interpolate(const Mesh& mesh, const std::function<double(const Point&)>& f);
Vector boundary_trace(const Mesh& mesh, const Vector& u);

/// u with u|boundary = f and zero A_gamma residual at interior vertices.
Vector solve_dirichlet(const Mesh& mesh, const ConductivityField& gamma, const Vector& f);
/// Minimal-H^1 extension of f (system A1 + M).
Vector solve_one_harmonic(const Mesh& mesh, const Vector& f);

struct LiftedSolution {
  Vector u;
  double norm = 0.0;   // ||u||_{H^1_0}
  double bound = 0.0;  // (||eta||_inf / ell) ||grad phi||
};
/// Zero-trace u with A_gamma u = A_eta phi on interior rows.
LiftedSolution solve_lifted(const Mesh& mesh, const ConductivityField& gamma,
                            const std::function<double(const Point&)>& eta, const Vector& phi);

}  // namespace calderon::fem
