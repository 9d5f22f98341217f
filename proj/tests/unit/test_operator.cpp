#include "bpplab/counterexamples.hpp"
#include "bpplab/error.hpp"
#include "bpplab/operator.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace bpplab;

namespace {

const Ball kUnitDisk{make_vector({0.0, 0.0}), 1.0};

QuasilinearData scalar_b(int n, const Ball& ball,
                         std::function<double(double, double)> b_of_zd) {
  QuasilinearData q;
  q.dimension = n;
  q.principal = [n](const Vector&, double, const Vector&) {
    return Matrix::Identity(n, n).eval();
  };
  q.lower_order = [=](const Vector& x, double z, const Vector&) {
    return b_of_zd(z, ball.boundary_distance(x));
  };
  return q;
}

}  // namespace

TEST(Operator, AsymmetricMatrixRejected) {
  const OperatorCoefficients c(
      2,
      [](const Vector&) {
        Matrix m(2, 2);
        m << 1.0, 0.5, 0.0, 1.0;
        return m;
      },
      [](const Vector&) { return Vector::Zero(2).eval(); }, [](const Vector&) { return 0.0; },
      CoefficientDomain::ball(kUnitDisk));
  EXPECT_THROW(c.a(make_vector({0.1, 0.1})), DomainError);
}

TEST(Operator, AdversarialCoefficientValues) {
  const Ball interval{make_vector({0.0}), 1.0};
  const auto c1 = adversarial_coefficients(1, interval, RadialWeight::constant(1.0));
  EXPECT_NEAR(c1.c(make_vector({0.5})), -1.0 / 0.5, 1e-15);
  EXPECT_NEAR(c1.c(make_vector({-0.9})), -1.0 / 0.1, 1e-12);

  const auto c2 = adversarial_coefficients(2, kUnitDisk, RadialWeight::power(2.0, 0.5));
  EXPECT_NEAR(c2.c(make_vector({0.96, 0.0})), -250.0, 1e-9);
  const Vector mid = make_vector({0.3, -0.4});  // d = R/2
  const double lam = 2.0 / std::sqrt(0.5);
  EXPECT_NEAR(std::abs(c2.b(mid)(0)), lam, 1e-12);
  EXPECT_NEAR(std::abs(c2.b(mid)(1)), lam, 1e-12);
  ASSERT_TRUE(c2.certificate().has_value());
  EXPECT_TRUE(c2.certificate()->pass());
}

TEST(Operator, AdversarialNeedsWeightAtLeastOne) {
  EXPECT_THROW(adversarial_coefficients(2, kUnitDisk, RadialWeight::constant(0.5)),
               PreconditionError);
  EXPECT_THROW(adversarial_coefficients(2, kUnitDisk, RadialWeight::constant(2.0), 1.5),
               PreconditionError);
}

TEST(Operator, EllipticityExamples) {
  const auto samples = graded_ball_samples(kUnitDisk, 2000, 1e-8, 0);
  const auto dirs = probe_directions(2, 50, 0);

  const auto w1 = RadialWeight::constant(1.0);
  const auto lap = make_coefficient_family({{"family", "laplacian"}}, 2, kUnitDisk, w1);
  const auto e1 = ellipticity_check(lap, w1, kUnitDisk, samples, dirs);
  EXPECT_TRUE(e1.pass());
  EXPECT_NEAR(e1.lower.worst_margin, 0.0, 1e-15);

  const auto aniso = make_coefficient_family({{"family", "anisotropic"}}, 2, kUnitDisk, w1);
  const auto e2 = ellipticity_check(aniso, w1, kUnitDisk, samples, dirs);
  EXPECT_FALSE(e2.pass());
  EXPECT_FALSE(e2.upper.pass);
  EXPECT_NEAR(e2.upper.worst_margin, -1.0, 1e-12);  // y = e2: 1 - 2

  const auto w2 = RadialWeight::power(2.0, 0.5);
  const auto scaled =
      make_coefficient_family({{"family", "scaled_identity"}}, 2, kUnitDisk, w2);
  const auto e3 = ellipticity_check(scaled, w2, kUnitDisk, samples, dirs);
  EXPECT_TRUE(e3.pass());
  EXPECT_GE(e3.lower.worst_margin, 1.0 - 1e-12);  // Λ >= 2 on (0, 1]
}

TEST(Operator, GrowthExamples) {
  const auto w = RadialWeight::power(2.0, 0.5);
  GrowthSampling s;
  s.samples = 3000;
  const auto sat = growth_check(
      make_coefficient_family({{"family", "adversarial"}}, 2, kUnitDisk, w), w, kUnitDisk, s);
  EXPECT_TRUE(sat.pass());
  EXPECT_LE(std::abs(sat.b_bound.worst_margin), 1e-12);
  EXPECT_LE(std::abs(sat.c_bound.worst_margin), 1e-12);

  const auto lap = growth_check(
      make_coefficient_family({{"family", "laplacian"}}, 2, kUnitDisk, RadialWeight::constant(1.0)),
      RadialWeight::constant(1.0), kUnitDisk, s);
  EXPECT_TRUE(lap.pass());

  const auto bad = growth_check(
      make_coefficient_family({{"family", "singular_c"}, {"power", 1.5}}, 2, kUnitDisk, w), w,
      kUnitDisk, s);
  EXPECT_FALSE(bad.pass());
  EXPECT_FALSE(bad.c_bound.pass);
  EXPECT_GT(bad.c_bound.worst_point.norm(), 0.99);
}

TEST(Operator, FamilyParsing) {
  const auto w = RadialWeight::constant(1.0);
  EXPECT_THROW(make_coefficient_family({{"family", "nonsense"}}, 2, kUnitDisk, w), ParseError);
  EXPECT_THROW(make_coefficient_family({{"family", "laplacian"}, {"extra", 1}}, 2, kUnitDisk, w),
               ParseError);
  EXPECT_THROW(make_coefficient_family(nlohmann::json::array(), 2, kUnitDisk, w), ParseError);
}

TEST(Operator, GradedSamplesInsideBall) {
  const Ball b{make_vector({1.0, -1.0, 0.5}), 0.7};
  for (const auto& x : graded_ball_samples(b, 500, 1e-9, 4)) {
    const double d = b.boundary_distance(x);
    EXPECT_GT(d, 0.0);
    EXPECT_LE(d, 0.7);
  }
}

TEST(Operator, LowerLipschitzExamples) {
  const LipschitzSampling s{4000, 1e-8, 0};
  const LipschitzBox box{1.0, 1.0};
  // Equality case: B = -z/d against Λ = 1 sits exactly on the bound.
  const auto on_bound = lower_lipschitz_check(
      scalar_b(2, kUnitDisk, [](double z, double d) { return -z / d; }),
      RadialWeight::constant(1.0), kUnitDisk, box, s);
  EXPECT_TRUE(on_bound.lower_order.pass);

  const auto too_steep = lower_lipschitz_check(
      scalar_b(2, kUnitDisk, [](double z, double d) { return -z / (d * d); }),
      RadialWeight::constant(1.0), kUnitDisk, box, s);
  EXPECT_FALSE(too_steep.lower_order.pass);

  const auto w = RadialWeight::power(2.0, 0.5);
  const auto saturated = lower_lipschitz_check(
      scalar_b(2, kUnitDisk, [w](double z, double d) { return -z * w.eval(d) / d; }), w,
      kUnitDisk, box, s);
  EXPECT_TRUE(saturated.pass());
}

TEST(Operator, ReductionOfUnboundedHessianCase) {
  const auto study = instantiate(CaseId::kUnboundedHessian);
  const auto w = RadialWeight::power(2.0, 0.5, 0.5);
  const auto samples = study.sample(2000, 0);
  const auto red = quasilinear_reduce(study.q, study.u, study.v, w, study.tangent_ball, samples);
  const auto e = ellipticity_check(red.coefficients, w, study.tangent_ball, samples,
                                   probe_directions(1, 4, 0));
  EXPECT_GE(e.lower.worst_margin, 1.0 - 1e-12);  // ã = 2
  for (const auto& x : samples) {
    EXPECT_GE(red.coefficients.c(x), red.c_lower_bound(x) * (1.0 + 1e-12));
  }
  EXPECT_GE(red.lambda_factor, 1.0);
  EXPECT_GT(red.hessian_sup, 1e3);  // v'' = 1.5 x^{-1/2} at x ~ 1e-8
}

TEST(Operator, ReductionBreaksZerothOrderBoundWhenBIsOnlyLocallyLipschitz) {
  // B = -z Δv/v ~ -2z/d² is Lipschitz only away from the boundary, so c̃ falls below
  // -(Λ/d)(n² sup|v_kl| + 1) near it, and ever further as d shrinks.
  const auto study = instantiate(CaseId::kLocalLowerLipschitz);
  const auto w = RadialWeight::constant(1.0);
  const auto samples = graded_ball_samples(kUnitDisk, 1000, 1e-3, 2);
  const auto red = quasilinear_reduce(study.q, study.u, study.v, w, kUnitDisk, samples);
  double worst = 0.0;
  for (const auto& x : samples) {
    worst = std::min(worst, red.coefficients.c(x) - red.c_lower_bound(x));
  }
  EXPECT_LT(worst, -1e3);
  EXPECT_NEAR(red.hessian_sup, 8.0, 0.1);
}

TEST(Operator, QuasilinearFormsAgree) {
  // div(η) and the Laplacian as A_ij u_ij must agree on a smooth field.
  const auto disk = instantiate(CaseId::kInfiniteOrderDisk);
  QuasilinearData nondiv = disk.q;
  nondiv.form = QuasilinearData::Form::kNonDivergence;
  nondiv.principal = [](const Vector&, double, const Vector&) {
    return Matrix::Identity(2, 2).eval();
  };
  for (const auto& x : disk.sample(200, 5)) {
    EXPECT_NEAR(apply_quasilinear(disk.q, disk.v, x), apply_quasilinear(nondiv, disk.v, x),
                1e-9 * (1.0 + std::abs(disk.v.hessian(x).trace())));
  }
}
