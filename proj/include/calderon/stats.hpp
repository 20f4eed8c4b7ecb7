#pragma once

#include <span>

namespace calderon::stats {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/// Ordinary least squares y = intercept + slope * x (needs two distinct x).
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace calderon::stats
