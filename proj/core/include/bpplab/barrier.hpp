#pragma once

#include "bpplab/operator.hpp"
#include "bpplab/types.hpp"
#include "bpplab/weight.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace bpplab {

// k = 2n(2/R + 1) + 3
double compute_k(int n, double R);

// Largest ε (found by bisection on (0, min{1, R/2})) with
// I1(ε) < (1 - margin)/k. Throws NotFoundError when only widths below
// 1e3·DBL_EPSILON·max(1, R), which radii near R cannot resolve, qualify.
double admissible_epsilon(int n, double R, const RadialWeight& weight,
                          double margin = 1e-3);

struct RadialProfile {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;  // NaN at r = 0, where Λ may be unbounded
};

struct BarrierValue {
  double value = 0.0;
  Vector gradient;
};

// Comparison function on the annulus R - ε < |x| < R around the origin:
//   f(r) = r + k I2(r),  ṽ(x) = f(R - |x|),  v = m ṽ / f(ε).
// v vanishes on |x| = R, equals m on |x| = R - ε, and L[ṽ] >= Λ(R - |x|) for
// every operator obeying the growth bounds with weight Λ.
class Barrier {
 public:
  Barrier(int n, double R, double eps, double m, RadialWeight weight);
  static Barrier with_admissible_epsilon(int n, double R, double m,
                                         RadialWeight weight);

  int n() const { return n_; }
  double R() const { return R_; }
  double eps() const { return eps_; }
  double m() const { return m_; }
  double k() const { return k_; }
  double f_at_eps() const { return f_at_eps_; }
  const RadialWeight& weight() const { return weight_; }

  RadialProfile f(double r) const;
  // Requires R - ε <= |x| <= R (up to 1e-12 relative rounding).
  BarrierValue eval(const Vector& x) const;
  // Outward normal derivative of v on |x| = R: -m / f(ε).
  double normal_derivative() const { return -m_ / f_at_eps_; }

  // L[ṽ](x) from the radial closed form; x strictly inside the annulus.
  double radial_operator(const OperatorCoefficients& coeffs,
                         const Vector& x) const;

  nlohmann::json to_json() const;

 private:
  double distance_to_outer(const Vector& x) const;

  int n_;
  double R_;
  double eps_;
  double m_;
  double k_;
  RadialWeight weight_;
  double f_at_eps_;
};

inline constexpr double kAnnulusGuard = 1e-12;

// Points in the open annulus, half with R - |x| log-uniform in
// [guard, ε - guard] and half uniform in that range.
std::vector<Vector> annulus_samples(const Barrier& barrier, std::size_t count,
                                    std::uint64_t seed);

struct ResidualReport {
  double min_residual = 0.0;  // min over samples of L[ṽ](x) - Λ(R - |x|)
  Vector argmin_point;
  bool pass = false;
  std::size_t n_samples = 0;
  bool certificate_missing = false;
  nlohmann::json to_json() const;
};

ResidualReport residual_check(const Barrier& barrier,
                              const OperatorCoefficients& coeffs,
                              const std::vector<Vector>& samples,
                              double atol = 1e-8);

}  // namespace bpplab
