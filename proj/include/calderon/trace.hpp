#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "calderon/expression.hpp"
#include "calderon/fem.hpp"

namespace calderon::trace {

using fem::Matrix;
using fem::SparseMatrix;
using fem::Vector;

/// Dense Schur complement A_bb - A_bi A_ii^-1 A_ib, one interior solve per
/// boundary column against a shared factorization.
Matrix schur_complement(const fem::InteriorSolver& solver);
Matrix schur_complement_serial(const fem::InteriorSolver& solver);

/// Discrete trace-space inner product: Schur complement of A1 + M.
class BoundaryGram {
 public:
  explicit BoundaryGram(Matrix s);

  const Matrix& matrix() const { return s_; }
  Eigen::Index size() const { return s_.rows(); }
  double norm(const Vector& f) const;
  /// sqrt(g^T S^-1 g)
  double dual_norm(const Vector& g) const;
  Vector solve(const Vector& g) const;
  Matrix solve(const Matrix& g) const;

 private:
  Matrix s_;
  Eigen::LLT<Matrix> llt_;
};

BoundaryGram assemble_trace_gram(const Mesh& mesh);

struct DtNOperator {
  Matrix lambda;
  std::string gamma;
};

DtNOperator assemble_dtn(const Mesh& mesh, const ConductivityField& gamma);
DtNOperator assemble_dtn(const fem::InteriorSolver& solver, std::string description);

/// Deliberate defect for mutation testing of the validation battery.
enum class Fault { none, dtn_sign };
void inject_fault(Fault fault);
Fault injected_fault();

/// g = (A u)|_boundary + (M div)|_boundary, the functional
/// v -> int gamma grad u . grad v + int div(gamma grad u) v. Without `divergence`
/// the interior residual of u is assumed to vanish.
Vector weak_normal_derivative(const Mesh& mesh, const SparseMatrix& a, const Vector& u,
                              const std::optional<Vector>& divergence = std::nullopt);
Vector weak_normal_derivative(const Mesh& mesh, const ConductivityField& gamma, const Vector& u);

double dual_norm(const Vector& g, const BoundaryGram& gram);

struct PowerIterationOptions {
  double tolerance = 1e-8;
  int max_iterations = 10000;
  std::uint64_t seed = 7;
};

inline constexpr Eigen::Index kPowerBlock = 4;

/// ||D||_{L(B, B')}: square root of the top eigenvalue of S^-1 D^T S^-1 D,
/// by block power iteration (kPowerBlock vectors, Rayleigh-Ritz) in the S
/// inner product. Stops when the estimate changes by at most `tolerance`
/// relative.
double operator_norm(const Matrix& d, const BoundaryGram& gram, const PowerIterationOptions& options = {});
double operator_norm_diff(const DtNOperator& a, const DtNOperator& b, const BoundaryGram& gram,
                          const PowerIterationOptions& options = {});
/// Dense generalized eigen-solve of the same quantity (oracle for small sizes).
double operator_norm_dense(const Matrix& d, const BoundaryGram& gram);

struct IdentitySides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = f2^T (L1 - L2) f1, rhs = sum_T (g1 - g2)(c_T) grad u1 . grad u2 |T|.
IdentitySides alessandrini_identity(const Mesh& mesh, const ConductivityField& gamma1,
                                    const ConductivityField& gamma2, const Vector& f1, const Vector& f2);

struct ModulationCheck {
  double lhs = 0.0;       // ||phi f|| in B (or B')
  double rhs = 0.0;       // sqrt(2) ||phi||_{W^{1,inf}} ||f||
  double phi_w1inf = 0.0;
};

/// ||phi||_{W^{1,inf}} sampled on vertices and centroids.
double sampled_w1inf(const Mesh& mesh, const expr::Expression& phi);

ModulationCheck modulated_trace_norm_check(const Mesh& mesh, const BoundaryGram& gram, const expr::Expression& phi,
                                           const Vector& f);
ModulationCheck modulated_dual_norm_check(const Mesh& mesh, const BoundaryGram& gram, const expr::Expression& phi,
                                          const Vector& g);

struct DtNStructure {
  double symmetry = 0.0;        // ||L - L^T||_max / ||L||_max
  double constants = 0.0;       // ||L 1|| / (||L||_F sqrt(n))
  double min_eigenvalue = 0.0;  // on the complement of constants, relative to ||L||_2
};
DtNStructure check_structure(const Matrix& lambda);

/// `# calderon-dtn v1, n=<n>` followed by n comma-separated rows.
void write_dense_csv(std::ostream& os, const Matrix& m);
Matrix read_dense_csv(std::istream& is);

}  // namespace calderon::trace
