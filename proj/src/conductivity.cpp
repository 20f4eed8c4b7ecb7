#include "calderon/conductivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "calderon/error.hpp"
#include "calderon/mesh.hpp"

namespace calderon {

using expr::Expression;
using expr::Var;

void ConductivityField::derive() {
  if (gamma_.has_free_parameters()) fail(ErrorKind::config, "conductivity has unbound parameters: " + gamma_.to_string());
  dx_ = gamma_.derivative(Var::x);
  dy_ = gamma_.derivative(Var::y);
  dxx_ = dx_.derivative(Var::x);
  dxy_ = dx_.derivative(Var::y);
  dyy_ = dy_.derivative(Var::y);
  lap_sqrt_ = sqrt(gamma_).laplacian();
}

ConductivityField ConductivityField::from_expression(const Expression& gamma) {
  ConductivityField f;
  f.kind_ = ConductivityKind::analytic_expression;
  f.gamma_ = gamma;
  f.derive();
  return f;
}

ConductivityField ConductivityField::parse(std::string_view text) { return from_expression(Expression::parse(text)); }

ConductivityField ConductivityField::constant(double value) { return from_expression(Expression::constant(value)); }

ConductivityField ConductivityField::radial_bump(const Point& centre, double radius, double height, double base) {
  require(radius > 0.0, "bump radius must be positive");
  std::ostringstream os;
  os.precision(17);
  os << base << " + " << height << " * bump(((x - " << centre.x() << ")^2 + (y - " << centre.y() << ")^2) / "
     << radius * radius << ")";
  ConductivityField f = from_expression(Expression::parse(os.str()));
  f.kind_ = ConductivityKind::radial_bump;
  f.centre_ = centre;
  f.radius_ = radius;
  f.base_ = base;
  return f;
}

ConductivityField ConductivityField::piecewise_collar(const Point& centre, double radius, const Expression& inner,
                                                      double base) {
  require(radius > 0.0, "collar radius must be positive");
  ConductivityField f;
  f.kind_ = ConductivityKind::piecewise_smooth_collar;
  f.gamma_ = inner;
  f.centre_ = centre;
  f.radius_ = radius;
  f.base_ = base;
  return f;
}

double ConductivityField::operator()(const Point& p) const {
  if (kind_ == ConductivityKind::piecewise_smooth_collar)
    return (p - centre_).norm() < radius_ ? gamma_(p.x(), p.y()) : base_;
  return gamma_(p.x(), p.y());
}

Point ConductivityField::gradient(const Point& p) const {
  if (!has_gradient()) fail(ErrorKind::capability, "piecewise conductivity has no gradient");
  return {dx_(p.x(), p.y()), dy_(p.x(), p.y())};
}

double ConductivityField::laplacian_sqrt(const Point& p) const {
  if (!has_gradient()) fail(ErrorKind::capability, "piecewise conductivity has no second derivatives");
  return lap_sqrt_(p.x(), p.y());
}

double ConductivityField::hessian_max(const Point& p) const {
  if (!has_gradient()) fail(ErrorKind::capability, "piecewise conductivity has no second derivatives");
  return std::max({std::abs(dxx_(p.x(), p.y())), std::abs(dxy_(p.x(), p.y())), std::abs(dyy_(p.x(), p.y()))});
}

std::string ConductivityField::to_string() const {
  if (kind_ != ConductivityKind::piecewise_smooth_collar) return gamma_.to_string();
  std::ostringstream os;
  os << "piecewise(|x-(" << centre_.x() << "," << centre_.y() << ")|<" << radius_ << ": " << gamma_.to_string()
     << "; else " << base_ << ")";
  return os.str();
}

ConductivityBounds measure_bounds(const ConductivityField& gamma, const Mesh& mesh) {
  geometry::PlanarDomain boundary;
  for (int v : mesh.boundary_indices) boundary.vertices.push_back(mesh.vertices[v]);
  return measure_bounds(gamma, mesh, boundary);
}

ConductivityBounds measure_bounds(const ConductivityField& gamma, const Mesh& mesh,
                                  const geometry::PlanarDomain& domain) {
  std::vector<Point> samples = mesh.vertices;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) samples.push_back(mesh.centroid(t));
  const std::size_t n = samples.size();
  std::vector<double> values(n);
  ConductivityBounds b;
  b.ell = std::numeric_limits<double>::infinity();
  b.sup = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = gamma(samples[i]);
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      fail(ErrorKind::ellipticity, "conductivity is not positive at (" + std::to_string(samples[i].x()) + ", " +
                                       std::to_string(samples[i].y()) + ")");
    b.ell = std::min(b.ell, values[i]);
    b.sup = std::max(b.sup, values[i]);
    if (gamma.has_gradient()) {
      b.lip = std::max(b.lip, gamma.gradient(samples[i]).norm());
      b.w2 = std::max(b.w2, gamma.hessian_max(samples[i]));
    }
  }

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int v : mesh.boundary_indices) {
    lo = std::min(lo, values[v]);
    hi = std::max(hi, values[v]);
  }
  if (hi - lo > 1e-12 * hi) return b;
  b.boundary_value = 0.5 * (lo + hi);
  double width = std::numeric_limits<double>::infinity();
#pragma omp parallel for reduction(min : width) schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    if (std::abs(values[i] - b.boundary_value) <= 1e-12 * b.boundary_value) continue;
    width = std::min(width, geometry::distance_to_boundary(domain, samples[i]));
  }
  if (!std::isfinite(width)) {
    double extent = 0.0;
    for (const Point& p : mesh.vertices) extent = std::max(extent, (p - mesh.vertices.front()).norm());
    width = extent;
  }
  b.collar_width = width;
  return b;
}

}  // namespace calderon
