#pragma once

#include <span>
#include <vector>

namespace lidx {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussRule gauss_legendre(int n);

/// Ordinary least-squares line y = intercept + slope * x with the
/// standard error of the slope.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  int samples = 0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Fit of log(y) against log(x); non-positive samples are skipped.
LineFit fit_loglog(std::span<const double> x, std::span<const double> y);

}  // namespace lidx
