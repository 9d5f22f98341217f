#include "bpplab/quadrature.hpp"

#include "bpplab/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace bpplab {
namespace {

constexpr std::array<double, 5> kNodes = {
    0.1488743389816312108848260, 0.4333953941292471907992659,
    0.6794095682990244062343274, 0.8650633666889845107320967,
    0.9739065285171717200779640};
constexpr std::array<double, 5> kWeights = {
    0.2955242247147528701738930, 0.2692667193099963550912269,
    0.2190863625159820439955349, 0.1494513491505805931457763,
    0.0666713443086881375935688};

constexpr int kMinLevels = 3;

double panel_integral(const std::function<double(double)>& integrand,
                      double lo, double hi,
                      std::span<const double> breakpoints) {
  auto first = std::upper_bound(breakpoints.begin(), breakpoints.end(), lo);
  double total = 0.0;
  double a = lo;
  for (auto it = first; it != breakpoints.end() && *it < hi; ++it) {
    total += gauss_legendre(integrand, a, *it);
    a = *it;
  }
  total += gauss_legendre(integrand, a, hi);
  return total;
}

// Remainder estimate for a geometric sequence of panel contributions.
double tail_estimate(double previous, double last) {
  if (last == 0.0 && previous == 0.0) return 0.0;
  if (previous <= 0.0) return std::numeric_limits<double>::infinity();
  const double ratio = last / previous;
  if (ratio < 0.0 || ratio >= 1.0) return std::numeric_limits<double>::infinity();
  return last * ratio / (1.0 - ratio);
}

}  // namespace

double gauss_legendre(const std::function<double(double)>& integrand, double a,
                      double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < kNodes.size(); ++i) {
    const double dx = half * kNodes[i];
    sum += kWeights[i] * (integrand(mid - dx) + integrand(mid + dx));
  }
  return sum * half;
}

GradedIntegral graded_integral(const std::function<double(double)>& integrand,
                               double r, std::span<const double> breakpoints,
                               const QuadratureOptions& options) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw DomainError("graded_integral: upper limit must be finite and >= 0");
  }
  if (r == 0.0) return {0.0, 0};

  double partial = 0.0;
  double previous_panel = 0.0;
  double previous_estimate = std::numeric_limits<double>::quiet_NaN();
  double hi = r;
  for (int level = 0; level < options.max_levels; ++level) {
    const double lo = 0.5 * hi;
    const double panel = panel_integral(integrand, lo, hi, breakpoints);
    partial += panel;
    if (level >= 1) {
      const double estimate = partial + tail_estimate(previous_panel, panel);
      if (level >= kMinLevels && std::isfinite(estimate) &&
          std::isfinite(previous_estimate) &&
          std::abs(estimate - previous_estimate) <=
              options.rtol * std::abs(estimate)) {
        return {estimate, level + 1};
      }
      previous_estimate = estimate;
    }
    previous_panel = panel;
    hi = lo;
  }
  throw DivergenceError("graded_integral: no convergence within " +
                        std::to_string(options.max_levels) +
                        " levels; integrand is not integrable at 0");
}

}  // namespace bpplab
