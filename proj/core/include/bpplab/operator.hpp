#pragma once

#include "bpplab/fields.hpp"
#include "bpplab/types.hpp"
#include "bpplab/weight.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bpplab {

// Where a coefficient family is defined: a ball (inner_radius == 0) or the
// open annulus inner_radius < |x - center| < outer_radius.
struct CoefficientDomain {
  Vector center;
  double inner_radius = 0.0;
  double outer_radius = 0.0;

  static CoefficientDomain ball(const Ball& b) { return {b.center, 0.0, b.radius}; }
  static CoefficientDomain annulus(Vector center, double inner, double outer) {
    return {std::move(center), inner, outer};
  }
  bool contains(const Vector& x) const;
  nlohmann::json to_json() const;
};

// Worst sampled margin of one inequality; pass iff worst_margin >= -tolerance.
struct CheckOutcome {
  bool pass = true;
  double worst_margin = 0.0;
  Vector worst_point;
  std::size_t evaluations = 0;

  nlohmann::json to_json() const;
};

// Sampled evidence that coefficients obey the growth bounds
//   |y|^2 <= y^T a y <= Λ(d)|y|^2,  |b_i| <= Λ(d),  c >= -Λ(d)/d
// with d the distance to the boundary of `ball`.
struct GrowthCertificate {
  RadialWeight weight;
  Ball ball;
  CheckOutcome ellipticity;
  CheckOutcome a_upper;
  CheckOutcome b_bound;
  CheckOutcome c_bound;
  std::size_t n_samples = 0;

  bool pass() const {
    return ellipticity.pass && a_upper.pass && b_bound.pass && c_bound.pass;
  }
  nlohmann::json to_json() const;
};

// Coefficients a_ij, b_i, c of L[u] = a:D²u + b·Du + c u as point-evaluable
// maps. a(x) is symmetrised on evaluation; an asymmetry larger than 1e-12
// (relative) is a DomainError.
class OperatorCoefficients {
 public:
  using MatrixFn = std::function<Matrix(const Vector&)>;
  using VectorFn = std::function<Vector(const Vector&)>;
  using ScalarFn = std::function<double(const Vector&)>;

  OperatorCoefficients(int dimension, MatrixFn a, VectorFn b, ScalarFn c,
                       CoefficientDomain domain, std::string name = "custom");

  int dimension() const { return dimension_; }
  const CoefficientDomain& domain() const { return domain_; }
  const std::string& name() const { return name_; }

  Matrix a(const Vector& x) const;
  Vector b(const Vector& x) const { return b_(x); }
  double c(const Vector& x) const { return c_(x); }

  // L applied pointwise to given derivative data.
  double apply(const Vector& x, double value, const Vector& gradient,
               const Matrix& hessian) const;

  const std::optional<GrowthCertificate>& certificate() const {
    return certificate_;
  }
  void attach_certificate(GrowthCertificate certificate) {
    certificate_ = std::move(certificate);
  }

 private:
  int dimension_;
  MatrixFn a_;
  VectorFn b_;
  ScalarFn c_;
  CoefficientDomain domain_;
  std::string name_;
  std::optional<GrowthCertificate> certificate_;
};

inline constexpr double kMarginTolerance = 1e-10;

// Points in `ball` whose distances to ∂ball are graded toward 0: half are
// log-uniform in [d_min, radius), half uniform in the ball radius.
std::vector<Vector> graded_ball_samples(const Ball& ball, std::size_t count,
                                        double d_min, std::uint64_t seed);

// Axis vectors followed by `random_count` random unit vectors.
std::vector<Vector> probe_directions(int n, std::size_t random_count,
                                     std::uint64_t seed);

struct EllipticityReport {
  CheckOutcome lower;  // min y^T a y - |y|^2
  CheckOutcome upper;  // min Λ(d)|y|^2 - y^T a y
  bool pass() const { return lower.pass && upper.pass; }
  nlohmann::json to_json() const;
};

EllipticityReport ellipticity_check(const OperatorCoefficients& coeffs,
                                    const RadialWeight& weight, const Ball& ball,
                                    const std::vector<Vector>& samples,
                                    const std::vector<Vector>& directions);

struct GrowthSampling {
  std::size_t samples = 10000;
  std::size_t random_directions = 100;
  double d_min = 1e-10;
  std::uint64_t seed = 0;
};

GrowthCertificate growth_check(const OperatorCoefficients& coeffs,
                               const RadialWeight& weight, const Ball& ball,
                               const GrowthSampling& sampling = {});

// The family that saturates the growth bounds:
//   a = I + bump·(Λ(d) - 1) ê êᵀ (ê radial),  b_i = Λ(d)·sign(x_i - x0_i),
//   c = -Λ(d)/d.
// The sign of b makes b·Dṽ as negative as allowed for the radially
// decreasing barrier. Requires Λ >= 1 on (0, R] and bump in [0, 1]. The
// returned coefficients carry their growth certificate.
OperatorCoefficients adversarial_coefficients(int n, const Ball& ball,
                                              const RadialWeight& weight,
                                              double bump = 0.0);

// Named families for configuration files:
//   {"family": "laplacian"}
//   {"family": "adversarial", "bump": 0.5}
//   {"family": "scaled_identity"}                       a = Λ(d) I
//   {"family": "singular_c", "power": 1.5, "scale": 1}  c = -scale·Λ(d)/d^power
//   {"family": "anisotropic"}                           a = diag(1, 1 + Λ(d), 1...)
// Unknown families or keys raise ParseError.
OperatorCoefficients make_coefficient_family(const nlohmann::json& spec, int n,
                                             const Ball& ball,
                                             const RadialWeight& weight);

// ---------------------------------------------------------------------------
// Quasi-linear operators Q[u] = A_ij(x,u,Du) u_ij + B(x,u,Du) (non-divergence)
// or div A(x,u,Du) + B(x,u,Du) (divergence form).

struct QuasilinearBounds {
  double M_z = 0.0;
  double M_eta = 0.0;
  double a_z = 0.0;
  double a_eta = 0.0;
  double b_z = 0.0;
  double b_eta = 0.0;
  nlohmann::json to_json() const;
};

struct QuasilinearData {
  enum class Form { kNonDivergence, kDivergence };
  using MatrixFn = std::function<Matrix(const Vector&, double, const Vector&)>;
  using VectorFn = std::function<Vector(const Vector&, double, const Vector&)>;
  using ScalarFn = std::function<double(const Vector&, double, const Vector&)>;

  Form form = Form::kNonDivergence;
  int dimension = 1;
  MatrixFn principal;     // A_ij (non-divergence form)
  VectorFn flux;          // A (divergence form)
  VectorFn flux_z;        // ∂A/∂z
  MatrixFn flux_eta;      // ∂A_i/∂η_j
  ScalarFn flux_x_divergence;  // Σ_i ∂A_i/∂x_i at fixed (z, η); zero if empty
  ScalarFn lower_order;   // B
  QuasilinearBounds bounds;

  // Matrix multiplying D²u: A_ij or ∂A_i/∂η_j.
  Matrix principal_at(const Vector& x, double z, const Vector& eta) const;
};

// Q[u](x) from closed-form derivatives of u.
double apply_quasilinear(const QuasilinearData& q, const AnalyticField& u,
                         const Vector& x);

// Linear operator obtained by writing Q[u] - Q[v] >= 0 as
// L̃[w] >= 0 for w = u - v:
//   ã_ij = A_ij(·, u, Du)
//   b̃_i  = Λ(d)(sgn(w_i) + Σ_kl v_kl sgn(v_kl w_i))
//   c̃    = (Λ(d)/d) Σ_kl v_kl sgn(v_kl w) + (B(·,u,Dv) - B(·,v,Dv))/(u - v)
// with sgn(0) = 0. Where |u - v| < 1e-14 the difference quotient is replaced
// by its admissible lower bound -Λ(d)/d.
struct ReducedOperator {
  OperatorCoefficients coefficients;
  double hessian_sup = 0.0;  // sampled sup |v_kl|
  // Factor by which Λ must be multiplied for the reduced coefficients to
  // satisfy the linear growth bounds: max(1 + n² sup|v_kl|, sup λmax(ã)/Λ).
  double lambda_factor = 1.0;
  // c̃ >= -(Λ(d)/d)(n² sup|v_kl| + 1)
  double c_lower_bound(const Vector& x) const;

  RadialWeight weight;
  Ball ball;
};

ReducedOperator quasilinear_reduce(const QuasilinearData& q,
                                   const AnalyticField& u,
                                   const AnalyticField& v,
                                   const RadialWeight& weight, const Ball& ball,
                                   const std::vector<Vector>& samples);

struct LipschitzBox {
  double M_z = 1.0;
  double M_eta = 1.0;
};

struct LipschitzSampling {
  std::size_t samples = 20000;
  double d_min = 1e-8;
  std::uint64_t seed = 0;
};

// Sampled check of
//   |A_ij(x,z1,η1) - A_ij(x,z2,η2)| <= Λ(d)(|z1 - z2|/d + Σ|η1 - η2|)
//   B(x,z1,η1) - B(x,z2,η2) >= -Λ(d)((z1 - z2)/d + Σ|η1 - η2|),  z1 >= z2
// over ball × [-M_z, M_z] × [-M_eta, M_eta]^n.
struct LipschitzReport {
  CheckOutcome principal;
  CheckOutcome lower_order;
  bool pass() const { return principal.pass && lower_order.pass; }
  nlohmann::json to_json() const;
};

LipschitzReport lower_lipschitz_check(const QuasilinearData& q,
                                      const RadialWeight& weight,
                                      const Ball& ball, const LipschitzBox& box,
                                      const LipschitzSampling& sampling = {});

nlohmann::json vector_to_json(const Vector& v);

}  // namespace bpplab
