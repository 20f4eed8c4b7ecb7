#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "calderon/trace.hpp"

namespace calderon::schrodinger {

using fem::Matrix;
using fem::SparseMatrix;
using fem::Vector;
using ComplexVector = Eigen::VectorXcd;

/// q = Laplacian(sqrt gamma) / sqrt gamma sampled at mesh vertices.
struct PotentialField {
  Vector values;
  double sup_bound = 0.0;
  bool analytic = false;
  std::function<double(const Point&)> eval;  // set on the analytic path only
};

/// Analytic when gamma carries second derivatives, otherwise the discrete
/// fallback (or a capability error when `allow_discrete` is false).
PotentialField compute_q(const Mesh& mesh, const ConductivityField& gamma, bool allow_discrete = true);
/// -(M^-1 A1 sqrt(gamma)) / sqrt(gamma) at interior vertices, 0 on the boundary.
Vector discrete_q(const Mesh& mesh, const ConductivityField& gamma);

/// sup over zero-trace w of |int grad v . grad w + q v w| / ||w||_{H^1},
/// for v = sqrt(gamma) u and u the gamma-harmonic extension of f.
double equivalence_residual(const Mesh& mesh, const ConductivityField& gamma, const Vector& f);

/// Schur complement of A1 + diag(q_i m_i); coercivity error when the
/// interior block is not positive definite.
trace::DtNOperator assemble_dtn_schrodinger(const Mesh& mesh, const Vector& q_at_vertices);

/// ||L~q - D L^gamma D|| / ||L~q|| in L(B, B') with D = diag(1 / sqrt(gamma_b)).
double conjugation_check(const Mesh& mesh, const ConductivityField& gamma);
double conjugation_check(const Mesh& mesh, const ConductivityField& gamma, const trace::BoundaryGram& gram);

/// xi = tau (omega1 + i omega2), omega2 = omega1 rotated by +90 degrees.
struct ComplexFrequency {
  double tau = 0.0;
  Point omega1 = Point(1.0, 0.0);
  Point omega2 = Point(0.0, 1.0);

  static ComplexFrequency make(double tau, double angle = 0.0);
  Eigen::Vector2cd xi() const;
  /// Bilinear xi . xi.
  std::complex<double> self_dot() const;
  double magnitude() const;
  ComplexFrequency conjugate() const;
};

struct CGOSolution {
  ComplexFrequency frequency;
  ComplexVector remainder;   // at box mesh vertices
  double residual = 0.0;     // relative algebraic residual of the solve
  double norm_omega = 0.0;   // ||R||_{L^2(Omega)}
};

/// Square-celled box aligned with (omega1, omega2) covering the domain's
/// extent in that frame inflated by 50%. Unknowns are anti-periodic along
/// omega1 and periodic along omega2 (shifted lattice), so the constant-
/// coefficient part of the CGO operator has no discrete kernel.
struct CGOBox {
  Mesh mesh;
  int nx = 0;  // cells along omega1 (even)
  int ny = 0;  // cells along omega2
  Point omega1 = Point(1.0, 0.0);
};

CGOBox cgo_box(const geometry::PlanarDomain& domain, double h, double angle = 0.0);

/// Solves (-Laplace - 2 xi . grad + q) R = -q on the box with the shifted
/// periodic identification. `q_box` holds q at box vertices (zero outside
/// Omega); `in_omega` flags box triangles counted in the L^2(Omega) norm.
CGOSolution solve_cgo_remainder(const CGOBox& box, const Vector& q_box, const std::vector<char>& in_omega,
                                const ComplexFrequency& frequency);

struct CGORow {
  double tau = 0.0;
  double abs_xi = 0.0;
  double norm_r = 0.0;
  double residual = 0.0;
};

struct CGODecayReport {
  std::vector<CGORow> rows;
  double q_sup = 0.0;
  double slope = 0.0;        // log ||R|| against log |xi| over rows with |xi| > ||q||_inf
  bool degenerate = false;   // q = 0
  double plateau = 0.0;      // max ||R|| / ||q||_inf over rows with |xi| <= ||q||_inf
  int fit_points = 0;
  double h = 0.0;
};

struct CGOOptions {
  double h = 0.0125;
  double angle = 0.0;
};

/// Sweep over increasing tau (at least 4 values); requires h * tau_max <= 0.5.
CGODecayReport cgo_decay_experiment(const geometry::PlanarDomain& domain, const ConductivityField& gamma,
                                    const std::vector<double>& taus, const CGOOptions& options);
CGODecayReport cgo_decay_experiment_serial(const geometry::PlanarDomain& domain, const ConductivityField& gamma,
                                           const std::vector<double>& taus, const CGOOptions& options);

/// <d(phi psi)/dn, chi> - <d phi/dn, psi chi> - <d psi/dn, phi chi>, with
/// each normal derivative built from interpolated Laplacians, relative to the
/// sum of the absolute pairings.
double product_rule_defect(const Mesh& mesh, const expr::Expression& phi, const expr::Expression& psi,
                           const Vector& chi);

/// ||d u/dn||_{B'} for the gamma-conductivity normal derivative of u, using
/// the analytic divergence of gamma grad u.
double collar_normal_derivative(const Mesh& mesh, const trace::BoundaryGram& gram, const ConductivityField& gamma,
                                const expr::Expression& u);

}  // namespace calderon::schrodinger
