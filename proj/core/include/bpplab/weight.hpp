#pragma once

#include "bpplab/quadrature.hpp"

#include <json.hpp>

#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace bpplab {

// The growth weight Λ: a continuous, non-increasing, positive function on
// (0, d_max] that is integrable at 0. Three representations are supported:
//
//   constant   Λ(d) = λ0
//   power      Λ(d) = coeff · d^(-alpha),  alpha in (0, 1)
//   tabulated  monotone piecewise-linear through (distance, value) samples,
//              continued below the first sample by the power law through the
//              first two samples so that an endpoint singularity is kept.
//
// Values are immutable; every member function is pure.
class RadialWeight {
 public:
  enum class Kind { kConstant, kPower, kTabulated };

  static constexpr double kUnbounded = std::numeric_limits<double>::infinity();

  static RadialWeight constant(double value, double d_max = kUnbounded);
  static RadialWeight power(double coeff, double alpha,
                            double d_max = kUnbounded);
  static RadialWeight tabulated(std::vector<double> distances,
                                std::vector<double> values);
  // Tabulates another weight on `count` log-spaced distances in
  // [d_min, d_max]. Used to drive the quadrature path with known data.
  static RadialWeight sampled(const RadialWeight& source, double d_min,
                              double d_max, std::size_t count);
  // Two-column CSV (distance, value); see README for the format.
  static RadialWeight from_csv(const std::string& path);
  // "constant:<v>", "power:<c>,<alpha>" or "file:<csv path>".
  static RadialWeight parse(std::string_view spec);

  Kind kind() const { return kind_; }
  double d_max() const { return d_max_; }

  double eval(double d) const;
  // I1(r) = ∫_0^r Λ(t) dt. Closed form for analytic kinds.
  double integrate_first(double r, const QuadratureOptions& options = {}) const;
  // I2(r) = ∫_0^r I1(s) ds = ∫_0^r (r - t) Λ(t) dt.
  double integrate_second(double r, const QuadratureOptions& options = {}) const;

  // Same integrals computed by graded quadrature regardless of kind.
  double integrate_first_by_quadrature(
      double r, const QuadratureOptions& options = {}) const;
  double integrate_second_by_quadrature(
      double r, const QuadratureOptions& options = {}) const;

  std::string describe() const;
  nlohmann::json to_json() const;

 private:
  struct Table {
    std::vector<double> distances;
    std::vector<double> values;
    double tail_exponent = 0.0;
  };

  RadialWeight(Kind kind, double a, double b, double d_max,
               std::shared_ptr<const Table> table);

  void check_radius(double r, const char* who) const;
  void check_sampled_monotonicity() const;
  std::span<const double> breakpoints() const;

  Kind kind_;
  double a_;  // λ0 or coeff
  double b_;  // alpha (power kind)
  double d_max_;
  std::shared_ptr<const Table> table_;
};

}  // namespace bpplab
