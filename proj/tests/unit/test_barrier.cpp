#include "bpplab/barrier.hpp"
#include "bpplab/error.hpp"
#include "bpplab/operator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace bpplab;

TEST(Barrier, KFormula) {
  EXPECT_DOUBLE_EQ(compute_k(2, 2.0), 11.0);
  EXPECT_DOUBLE_EQ(compute_k(1, 1.0), 9.0);
  EXPECT_DOUBLE_EQ(compute_k(3, 2.0), 15.0);
}

TEST(Barrier, AdmissibleEpsilon) {
  const double e1 = admissible_epsilon(2, 2.0, RadialWeight::constant(1.0));
  EXPECT_LE(e1, 1.0 / 11.0);
  EXPECT_GT(e1, 0.05);
  EXPECT_LT(0.05, 1.0 / 11.0);  // 0.05 itself qualifies

  const double e2 = admissible_epsilon(2, 2.0, RadialWeight::power(2.0, 0.5));
  EXPECT_LT(e2, 1.0 / 1936.0);
  EXPECT_GT(e2, 0.99 * 1.0 / 1936.0);

  const double e3 = admissible_epsilon(1, 1.0, RadialWeight::constant(10.0));
  EXPECT_LT(e3, 1.0 / 90.0);
  EXPECT_GT(e3, 0.99 / 90.0);
}

TEST(Barrier, ProfileValues) {
  const Barrier b(2, 2.0, 0.05, 1.0, RadialWeight::constant(1.0));
  const auto p = b.f(0.05);
  EXPECT_NEAR(p.value, 0.06375, 1e-16);
  EXPECT_NEAR(p.first, 1.55, 1e-15);
  EXPECT_NEAR(p.second, 11.0, 1e-15);
  const auto z = b.f(0.0);
  EXPECT_EQ(z.value, 0.0);
  EXPECT_EQ(z.first, 1.0);

  const Barrier s(2, 2.0, 4e-4, 1.0, RadialWeight::power(2.0, 0.5));
  EXPECT_NEAR(s.f(1e-4).second, 2200.0, 1e-9);
}

TEST(Barrier, BoundaryAndInteriorValues) {
  const Barrier b(2, 2.0, 0.05, 1.0, RadialWeight::constant(1.0));
  EXPECT_EQ(b.eval(make_vector({2.0, 0.0})).value, 0.0);
  EXPECT_NEAR(b.eval(make_vector({0.0, 1.95})).value, 1.0, 1e-15);
  // f(r) = r + 11 r²/2 by hand
  const double expected = (0.025 + 5.5 * 0.025 * 0.025) / (0.05 + 5.5 * 0.05 * 0.05);
  EXPECT_NEAR(b.eval(make_vector({1.975, 0.0})).value, expected, 4e-15);
  EXPECT_NEAR(expected, 0.446078431372549, 1e-15);
  EXPECT_NEAR(b.normal_derivative(), -1.0 / 0.06375, 1e-12);
  EXPECT_NEAR(b.normal_derivative(), -15.686274509803921, 1e-12);
}

TEST(Barrier, GradientPointsInward) {
  // k = 17; ∫_0^ε t^{-0.3} = ε^0.7/0.7 ≈ 0.0274 < 1/17 at ε = 0.005.
  const Barrier b(3, 1.5, 0.005, 2.0, RadialWeight::power(1.0, 0.3));
  const Vector x = make_vector({0.8, 0.6, 0.5}).normalized() * 1.4975;
  const auto v = b.eval(x);
  // Oracle: central difference of the value.
  for (int i = 0; i < 3; ++i) {
    Vector e = Vector::Zero(3);
    e(i) = 1e-6;
    const double fd = (b.eval(x + e).value - b.eval(x - e).value) / 2e-6;
    EXPECT_NEAR(v.gradient(i), fd, 1e-6);
  }
  EXPECT_LT(v.gradient.dot(x), 0.0);
}

TEST(Barrier, PreconditionsEnforced) {
  const auto w = RadialWeight::constant(1.0);
  EXPECT_THROW(Barrier(2, 2.0, 0.05, 0.0, w), PreconditionError);
  EXPECT_THROW(Barrier(2, 2.0, 1.5, 1.0, w), PreconditionError);
  EXPECT_THROW(Barrier(2, 2.0, 0.2, 1.0, w), PreconditionError);  // I1 > 1/k
  EXPECT_THROW(Barrier(2, 2.0, 0.05, 1.0, RadialWeight::constant(1.0, 0.01)),
               PreconditionError);
  const Barrier b(2, 2.0, 0.05, 1.0, w);
  EXPECT_THROW(b.eval(make_vector({1.0, 0.0})), DomainError);
  EXPECT_THROW(b.eval(make_vector({2.1, 0.0})), DomainError);
  EXPECT_THROW(b.f(0.06), DomainError);
}

TEST(Barrier, RadialOperatorMatchesFiniteDifferences) {
  const Barrier b(2, 2.0, 0.05, 1.0, RadialWeight::constant(1.0));
  const Ball ball{make_vector({0.0, 0.0}), 2.0};
  const auto lap = make_coefficient_family({{"family", "laplacian"}}, 2, ball,
                                           RadialWeight::constant(1.0));
  const double scale = b.f_at_eps() / b.m();
  const double h = 1e-4;
  for (double r : {1.96, 1.975, 1.99}) {
    const Vector x = make_vector({r * 0.6, r * 0.8});
    double lap_fd = 0.0;
    for (int i = 0; i < 2; ++i) {
      Vector e = Vector::Zero(2);
      e(i) = h;
      lap_fd += (b.eval(x + e).value - 2.0 * b.eval(x).value + b.eval(x - e).value) / (h * h);
    }
    EXPECT_NEAR(b.radial_operator(lap, x), lap_fd * scale, 1e-4) << r;
  }
}

TEST(Barrier, ResidualPassesForLaplacianAndAdversarial) {
  const auto w = RadialWeight::constant(1.0);
  const Barrier b(2, 2.0, 0.05, 1.0, w);
  const Ball ball{make_vector({0.0, 0.0}), 2.0};
  const auto samples = annulus_samples(b, 4000, 7);
  const auto lap = make_coefficient_family({{"family", "laplacian"}}, 2, ball, w);
  const auto r1 = residual_check(b, lap, samples);
  EXPECT_TRUE(r1.pass);
  EXPECT_GE(r1.min_residual, 0.0);
  EXPECT_TRUE(r1.certificate_missing);

  const auto adv = adversarial_coefficients(2, ball, w, 1.0);
  const auto r2 = residual_check(b, adv, samples);
  EXPECT_TRUE(r2.pass);
  EXPECT_FALSE(r2.certificate_missing);
}

TEST(Barrier, ResidualFailsForTooSingularZerothOrderTerm) {
  const auto w = RadialWeight::constant(1.0);
  const Barrier b(2, 2.0, 0.05, 1.0, w);
  const Ball ball{make_vector({0.0, 0.0}), 2.0};
  const auto bad = make_coefficient_family(
      {{"family", "singular_c"}, {"power", 2.0}, {"scale", 2.0}}, 2, ball, w);
  const auto r = residual_check(b, bad, annulus_samples(b, 4000, 1));
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.argmin_point.norm(), 1.99);
}

TEST(Barrier, AnnulusSamplesStayInside) {
  const Barrier b(3, 1.0, 0.01, 1.0, RadialWeight::constant(2.0));
  for (const auto& x : annulus_samples(b, 1000, 3)) {
    const double d = 1.0 - x.norm();
    EXPECT_GT(d, 0.0);
    EXPECT_LT(d, 0.01);
  }
}
