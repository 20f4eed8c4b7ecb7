#pragma once

#include <optional>
#include <string_view>

#include "calderon/expression.hpp"
#include "calderon/geometry.hpp"

namespace calderon {

struct Mesh;

enum class ConductivityKind { analytic_expression, radial_bump, piecewise_smooth_collar };

/// Positive scalar conductivity. Smooth kinds carry symbolic first and
/// second derivatives; the piecewise kind only evaluates.
class ConductivityField {
 public:
  static ConductivityField from_expression(const expr::Expression& gamma);
  static ConductivityField parse(std::string_view text);
  static ConductivityField constant(double value);
  /// base + height * bump(|x - centre|^2 / radius^2); constant outside the disk.
  static ConductivityField radial_bump(const Point& centre, double radius, double height, double base = 1.0);
  /// inner(x) on |x - centre| < radius, base elsewhere (no derivative data).
  static ConductivityField piecewise_collar(const Point& centre, double radius, const expr::Expression& inner,
                                            double base);

  ConductivityKind kind() const { return kind_; }
  double operator()(const Point& p) const;
  bool has_gradient() const { return kind_ != ConductivityKind::piecewise_smooth_collar; }
  Point gradient(const Point& p) const;
  /// Laplacian of sqrt(gamma); only for smooth kinds.
  double laplacian_sqrt(const Point& p) const;
  /// Largest absolute second derivative (|d_xx|, |d_xy|, |d_yy|) at p.
  double hessian_max(const Point& p) const;

  const expr::Expression& expression() const { return gamma_; }
  std::string to_string() const;

 private:
  ConductivityKind kind_ = ConductivityKind::analytic_expression;
  expr::Expression gamma_;
  expr::Expression dx_, dy_, dxx_, dxy_, dyy_, lap_sqrt_;
  // Piecewise kind only.
  Point centre_ = Point::Zero();
  double radius_ = 0.0;
  double base_ = 1.0;

  void derive();
};

/// Sampled metadata over mesh vertices and triangle centroids.
struct ConductivityBounds {
  double ell = 0.0;           // inf
  double sup = 0.0;           // sup
  double lip = 0.0;           // sup |grad gamma|
  double w2 = 0.0;            // sup of second derivatives
  double collar_width = 0.0;  // gamma constant within this distance of the boundary
  double boundary_value = 0.0;  // value on the collar when collar_width > 0
};

/// Raises an ellipticity error when any sample is not positive.
ConductivityBounds measure_bounds(const ConductivityField& gamma, const Mesh& mesh,
                                  const geometry::PlanarDomain& domain);
ConductivityBounds measure_bounds(const ConductivityField& gamma, const Mesh& mesh);

}  // namespace calderon
