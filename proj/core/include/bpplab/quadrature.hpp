#pragma once

#include <functional>
#include <span>

namespace bpplab {

struct QuadratureOptions {
  double rtol = 1e-10;
  int max_levels = 40;
};

struct GradedIntegral {
  double value = 0.0;
  int levels = 0;
};

// 10-point Gauss-Legendre rule on [a, b].
double gauss_legendre(const std::function<double(double)>& integrand, double a,
                      double b);

// Integral over (0, r] of an integrand that may be singular at 0.
//
// The interval is split geometrically toward 0 into panels
// [r/2^(j+1), r/2^j]; each panel is further cut at the supplied breakpoints
// (kinks of tabulated data) and integrated with the Gauss-Legendre rule. The
// unresolved remainder (0, r/2^(j+1)] is estimated from the ratio of the last
// two panel contributions, which is exact for power laws. Levels are added
// until two successive estimates agree to rtol. A ratio that never drops
// below one (e.g. t^-1) exhausts max_levels and raises DivergenceError.
//
// Precondition: the integrand is non-negative near 0.
GradedIntegral graded_integral(const std::function<double(double)>& integrand,
                               double r, std::span<const double> breakpoints = {},
                               const QuadratureOptions& options = {});

}  // namespace bpplab
