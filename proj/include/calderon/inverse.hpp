#pragma once

#include <string>
#include <vector>

#include "calderon/report.hpp"
#include "calderon/schrodinger.hpp"
#include "calderon/trace.hpp"

namespace calderon::inverse {

using fem::Matrix;
using fem::Vector;

/// Discretely gamma-harmonic function with a dipole singularity at an
/// exterior point z: u = U / gamma(x0*) + w with
/// U(x) = nu . (x - z) / |x - z|^2, nu the unit vector from z to its nearest
/// boundary point x0*, and w the zero-trace correction.
struct SingularProbe {
  Point z;
  Point x0_star;
  Point nu;
  double scale = 0.0;          // 1 / gamma(x0*)
  Vector u;                    // at mesh vertices
  Vector trace;                // on boundary vertices, boundary order
  double correction_norm = 0.0;  // ||grad w||_{L^2}
  double residual = 0.0;       // interior rows of A_gamma u, relative
  double near_gradient = 0.0;  // max |grad u| over centroids in B_{2d}(z)
  double far_gradient = 0.0;   // max |grad u| over centroids outside B_{4d}(z)
  bool concentrated = false;
};

/// Unscaled dipole U at x.
double dipole(const Point& z, const Point& nu, const Point& x);

/// Requires z outside the closed domain with d(z, boundary) >= 2h, h the
/// longest mesh edge; geometry error otherwise.
SingularProbe build_singular_probe(const Mesh& mesh, const geometry::PlanarDomain& domain,
                                   const ConductivityField& gamma, const Point& z);
SingularProbe build_singular_probe(const fem::InteriorSolver& solver, const geometry::PlanarDomain& domain,
                                   const ConductivityField& gamma, const Point& z);

/// int_Omega |x - z|^-4 dx for z outside the closed polygon, in closed form
/// through the boundary integral -1/2 sum_e int_e (x - z) . n |x - z|^-4 ds.
double inverse_quartic_integral(const geometry::PlanarDomain& domain, const Point& z);

struct RecoverySchedule {
  Point x0;
  std::vector<int> k;
  std::vector<double> sigma;  // |z_k - x0|, strictly decreasing
  std::vector<geometry::CorkscrewCertificate> certificates;
};

/// Corkscrew certificates at r = 2^-k for k = k_min, k_min + 1, ... while
/// sigma_k >= 4h and d(z_k, boundary) >= 2h. k_min defaults to the first k
/// with 2^-k < diam / 2.
RecoverySchedule make_schedule(const geometry::PlanarDomain& domain, const Point& x0, double h, int k_min = 0,
                               int k_max = 40);

struct RecoveryRow {
  int k = 0;
  double sigma = 0.0;
  Point z;
  double numerator = 0.0;    // gamma1(x0*) gamma2(x0*) f2^T (L1 - L2) f1
  double denominator = 0.0;  // int_Omega |x - z|^-4
  double q = 0.0;
};

struct RecoveryResult {
  Point x0;
  std::vector<RecoveryRow> rows;
  double estimate = 0.0;  // intercept of the OLS fit of Q_k in sigma_k
  double slope = 0.0;
  double h = 0.0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  std::vector<std::string> warnings;
};

/// Estimates (gamma1 - gamma2)(x0). Probes that fail are skipped with a
/// warning; an empty schedule is a geometry error.
RecoveryResult boundary_recovery(const Mesh& mesh, const geometry::PlanarDomain& domain, const Matrix& lambda1,
                                 const Matrix& lambda2, const ConductivityField& gamma1,
                                 const ConductivityField& gamma2, const RecoverySchedule& schedule);

struct ConductivityPair {
  std::string label;
  ConductivityField gamma1;
  ConductivityField gamma2;
};

/// Rows (boundary_diff, lambda_diff, ratio); summary c = max ratio.
report::ExperimentReport boundary_stability_curve(const geometry::PlanarDomain& domain,
                                                  const std::vector<ConductivityPair>& pairs, double h);

struct LabelledPair {
  double t = 0.0;
  ConductivityField gamma1;
  ConductivityField gamma2;
};

struct DirectStabilityRow {
  double t = 0.0;
  double gamma_diff = 0.0;   // ||gamma1 - gamma2||_inf sampled
  double lambda_diff = 0.0;  // ||L1 - L2||
  double measured = 0.0;     // lambda_diff / gamma_diff
  double formula = 0.0;      // (1 + |g2|/l1)(1 + |g1|/l1 + |g2|/l2)
  double ratio = 0.0;        // measured / formula
  double interpolation_diff = 0.0;  // ||(L1 - g1 L^1) - (L2 - g2 L^1)||
};

struct DirectStabilityResult {
  std::vector<DirectStabilityRow> rows;
  double slope = 0.0;  // log lambda_diff against log t
  double r2 = 0.0;
  double max_ratio = 0.0;
};

DirectStabilityResult direct_stability_experiment(const Mesh& mesh, const std::vector<LabelledPair>& pairs);
/// Pairs (1 + t eta, 1).
DirectStabilityResult direct_stability_experiment(const Mesh& mesh, const expr::Expression& eta,
                                                  const std::vector<double>& ts);

struct LogQuotient {
  Vector w;
  Vector reference;  // ln(gamma1 / gamma2) at the vertices
  double l2_error = 0.0;
};

/// Solves div(sqrt(g1 g2) grad w) = 2 sqrt(g1 g2)(q1 - q2) with trace
/// ln(g1 / g2).
LogQuotient log_quotient_solve(const Mesh& mesh, const ConductivityField& gamma1, const ConductivityField& gamma2);

/// sqrt(b^T (A1 + M)_ii^-1 b) for the lumped load b of v on interior vertices.
double h_minus_one_norm(const Mesh& mesh, const Vector& v_at_vertices);

struct SchrodingerGap {
  double lhs = 0.0;            // ||L~q1 - L~q2||
  double lambda_diff = 0.0;    // ||L1 - L2||
  double boundary_diff = 0.0;  // ||gamma1 - gamma2||_{L^inf(boundary)}
  double c = 0.0;              // max(1/l, (sup/l)^{3/2} / l)
  double rhs = 0.0;            // c (lambda_diff + boundary_diff)
  double ratio = 0.0;          // lhs / rhs (0 when rhs = 0)
};

SchrodingerGap schrodinger_dtn_gap(const Mesh& mesh, const ConductivityField& gamma1,
                                   const ConductivityField& gamma2, const trace::BoundaryGram& gram);

struct DomainStabilityRow {
  double t = 0.0;
  double gamma_diff = 0.0;
  double lambda_diff = 0.0;
  double q_diff = 0.0;           // ||q1 - q2||_{H^-1}
  double schrodinger_diff = 0.0;  // ||L~q1 - L~q2||
  bool ok = true;
};

struct DomainStabilityResult {
  std::vector<DomainStabilityRow> rows;
  double delta = 0.0;  // ||dg||_inf ~ c |ln ||dL|| |^-delta
  double log_c = 0.0;
  double r2 = 0.0;
  int fit_points = 0;
  std::vector<std::string> warnings;
};

DomainStabilityResult domain_stability_experiment(const Mesh& mesh, const std::vector<LabelledPair>& pairs);

}  // namespace calderon::inverse
