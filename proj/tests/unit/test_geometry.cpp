#include "bpplab/error.hpp"
#include "bpplab/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace bpplab;

namespace {

constexpr double kPi = std::numbers::pi;

// Smallest m with κ^m < L, by plain iteration.
int brute_force_m_star(double kappa, double C, int n) {
  const double omega = n == 1 ? 2.0 : n == 2 ? kPi : 4.0 * kPi / 3.0;
  const double L = omega / (C * std::pow(3.0, n));
  int m = 0;
  double p = 1.0;
  while (!(p < L)) {
    p *= kappa;
    ++m;
  }
  return m;
}

}  // namespace

TEST(Geometry, ConeKappaExactValues) {
  EXPECT_EQ(cone_kappa(kPi / 2.0), 0.8);
  EXPECT_EQ(cone_kappa(kPi / 6.0), 0.875);
  EXPECT_THROW(cone_kappa(0.0), PreconditionError);
  EXPECT_THROW(cone_kappa(2.0), PreconditionError);
}

TEST(Geometry, ConeChainNestsAndShrinks) {
  for (double theta : {kPi / 6.0, kPi / 4.0, kPi / 3.0, kPi / 2.0}) {
    const auto chain = cone_chain(make_vector({0.0, 0.0}), make_vector({0.0, 1.0}), theta,
                                  0.2, 30);
    for (double m : chain.nesting_margins) EXPECT_LE(std::abs(m), 1e-12) << theta;
    for (std::size_t k = 1; k < chain.centers.size(); ++k) {
      EXPECT_NEAR(chain.radii[k] / chain.radii[k - 1], chain.kappa, 1e-14);
      EXPECT_NEAR(chain.centers[k].norm() / chain.centers[k - 1].norm(), chain.kappa, 1e-14);
      // tangent to the cone: distance to the axis-angle boundary equals r_k
      EXPECT_NEAR(chain.centers[k].norm() * std::sin(theta), chain.radii[k], 1e-14);
    }
  }
}

TEST(Geometry, OrderCertificate) {
  const auto c = order_certificate(0.8, 100.0, 2);
  EXPECT_EQ(c.m_star, 26);
  EXPECT_EQ(c.m_star, brute_force_m_star(0.8, 100.0, 2));
  EXPECT_FALSE(c.inconclusive);
  for (double kappa : {0.5, 0.8, 0.875, 0.95}) {
    for (int n : {1, 2, 3}) {
      EXPECT_EQ(order_certificate(kappa, 10.0, n).m_star, brute_force_m_star(kappa, 10.0, n));
    }
  }
  // m* grows without bound as κ -> 1
  int prev = 0;
  for (double kappa : {0.9, 0.99, 0.999, 0.9999}) {
    const int m = order_certificate(kappa, 100.0, 2).m_star;
    EXPECT_GT(m, prev);
    prev = m;
  }
}

TEST(Geometry, OrderCertificateFitsSamples) {
  std::vector<std::pair<double, double>> cubic;
  for (double d = 0.5; d > 1e-3; d *= 0.8) cubic.emplace_back(d, d * d * d);
  const auto c = order_certificate(0.8, 1.0, 2, cubic);
  ASSERT_TRUE(c.fitted_slope.has_value());
  EXPECT_NEAR(*c.fitted_slope, 3.0, 0.05);
  EXPECT_FALSE(c.inconclusive);  // m* = 9 here
  const auto tight = order_certificate(0.5, 1.0, 1, cubic);
  EXPECT_TRUE(tight.inconclusive);
}

TEST(Geometry, SingularDistances) {
  const auto cross = SingularSet::axis_cross();
  EXPECT_DOUBLE_EQ(cross.distance(make_vector({0.3, -0.2})), 0.2);
  const auto half = SingularSet::half_cross();
  EXPECT_DOUBLE_EQ(half.distance(make_vector({-0.5, 0.2})), 0.5);
  EXPECT_DOUBLE_EQ(half.distance(make_vector({0.5, 0.2})), 0.2);
  const auto lines = SingularSet::line_family();
  EXPECT_NEAR(lines.distance(make_vector({0.3, 0.0})), 0.05, 1e-15);
  EXPECT_NEAR(lines.distance(make_vector({-0.2, 0.7})), 0.2, 1e-15);
  EXPECT_NEAR(lines.distance(make_vector({0.9, 0.0})), 0.4, 1e-15);
  const auto pts = SingularSet::points({make_vector({0.0, 0.0}), make_vector({1.0, 1.0})});
  EXPECT_DOUBLE_EQ(pts.distance(make_vector({0.0, 0.5})), 0.5);
  EXPECT_TRUE(std::isinf(SingularSet::empty(2).distance(make_vector({0.0, 0.0}))));
  const auto seg = SingularSet::polyline({make_vector({0.0, 0.0}), make_vector({1.0, 0.0})});
  EXPECT_DOUBLE_EQ(seg.distance(make_vector({0.5, 0.3})), 0.3);
}

TEST(Geometry, WitnessesLieInsideTheBall) {
  const auto lines = SingularSet::line_family();
  const Vector c = make_vector({0.01, 0.0});
  const auto w = lines.witness_in_ball(c, 0.02);
  ASSERT_TRUE(w.has_value());
  EXPECT_LT((*w - c).norm(), 0.02);
  EXPECT_FALSE(lines.witness_in_ball(make_vector({0.75, 0.0}), 0.2).has_value());
  EXPECT_FALSE(SingularSet::empty(2).witness_in_ball(c, 10.0).has_value());
}

TEST(Geometry, CurveRecordsSecondDifference) {
  const auto arc = SingularSet::curve(
      [](double t) { return make_vector({0.5 * std::cos(t), 0.5 * std::sin(t)}); }, 0.0, kPi,
      200);
  // Uniform chords on a circle: |x_{i+1} - 2x_i + x_{i-1}| = 4r sin²(Δt/2).
  const double dt = kPi / 199.0;
  EXPECT_NEAR(arc.max_second_difference(), 2.0 * std::pow(std::sin(dt / 2.0), 2), 1e-12);
  EXPECT_NEAR(arc.distance(make_vector({0.0, 0.0})), 0.5, 1e-3);
}

TEST(Geometry, OutwardBallFoundForFinitePointsAndHalfCross) {
  for (const char* name : {"finite_points", "half_cross"}) {
    const auto scene = SingularSetScene::preset(name);
    for (double h : {0.1, 0.05, 0.01}) {
      const auto r = outward_ball_search(scene, h);
      EXPECT_TRUE(r.found) << name << " " << h;
      EXPECT_GT(r.distance_to_S, 0.0);
      EXPECT_GE(r.distance_to_S, r.radius - kTouchTolerance);
      EXPECT_GE(r.distance_to_boundary, r.radius - kTouchTolerance);
      EXPECT_NEAR(r.distance_to_T, r.radius, 1e-15);
    }
  }
}

TEST(Geometry, HalfCrossBallSitsLeftOfTheVerticalAxis) {
  const auto r = outward_ball_search(SingularSetScene::preset("half_cross"), 0.05);
  ASSERT_TRUE(r.found);
  EXPECT_LT(r.center(0), 0.0);
}

TEST(Geometry, OutwardBallFalsified) {
  for (const char* name : {"axis_cross", "line_family"}) {
    const auto scene = SingularSetScene::preset(name);
    for (double h : {0.1, 0.05, 0.01}) {
      const auto f = falsify_outward_ball(scene, h);
      EXPECT_TRUE(f.falsified) << name << " " << h;
      EXPECT_GT(f.candidates, 0u);
      EXPECT_EQ(f.candidates, f.witnessed);
      for (const auto& ex : f.examples) {
        EXPECT_LT(scene.singular.distance(ex.witness), 1e-12);
        EXPECT_LT((ex.witness - ex.center).norm(), ex.radius);
      }
      EXPECT_FALSE(outward_ball_search(scene, h).found);
    }
  }
}

TEST(Geometry, EmptySingularSetNeverFalsified) {
  const auto scene = SingularSetScene::preset("empty");
  EXPECT_FALSE(falsify_outward_ball(scene, 0.05).falsified);
  EXPECT_TRUE(outward_ball_search(scene, 0.05).found);
}

TEST(Geometry, Porosity) {
  const std::vector<double> scales{0.1, 0.05, 0.02};
  EXPECT_TRUE(porosity_check(SingularSetScene::preset("line_family"), make_vector({0.25, 0.0}),
                             scales)
                  .pass);
  const auto fp = SingularSetScene::preset("finite_points");
  EXPECT_TRUE(porosity_check(fp, make_vector({0.5, 0.5}), scales).pass);
  const auto dense = SingularSetScene::preset("dense_cloud");
  const auto r = porosity_check(dense, make_vector({0.0, 0.0}), scales);
  EXPECT_FALSE(r.pass);
  EXPECT_THROW(porosity_check(fp, make_vector({0.1, 0.1}), scales), PreconditionError);
}

TEST(Geometry, SceneValidation) {
  nlohmann::json j = {{"omega", {{"kind", "cube"}, {"n", 2}}},
                      {"singular", {{"kind", "axis_cross"}}},
                      {"T", {{"points", {{0.0, 0.0}}}}}};
  EXPECT_NO_THROW(SingularSetScene::from_json(j).validate());
  auto bad = j;
  bad["extra"] = 1;
  EXPECT_THROW(SingularSetScene::from_json(bad), ParseError);
  auto outside = j;
  outside["T"] = {{"points", {{2.0, 0.0}}}};
  EXPECT_THROW(SingularSetScene::from_json(outside).validate(), PreconditionError);
  auto empty = j;
  empty["T"] = {{"points", nlohmann::json::array()}};
  EXPECT_THROW(SingularSetScene::from_json(empty).validate(), PreconditionError);
  auto covering = j;
  covering["T"] = {{"boxes", {{{"lower", {-1.0, -1.0}}, {"upper", {1.0, 1.0}}}}}};
  EXPECT_THROW(SingularSetScene::from_json(covering).validate(), PreconditionError);
  EXPECT_THROW(SingularSetScene::preset("nope"), ParseError);
}

TEST(Geometry, SceneJsonRoundTrip) {
  for (const char* name : {"finite_points", "axis_cross", "half_cross", "line_family", "empty"}) {
    const auto s = SingularSetScene::preset(name);
    EXPECT_EQ(SingularSetScene::from_json(s.to_json()).to_json(), s.to_json()) << name;
  }
}

TEST(Geometry, LogLogSlope) {
  std::vector<double> d, v;
  for (double x = 1.0; x > 1e-4; x *= 0.5) {
    d.push_back(x);
    v.push_back(7.0 * std::pow(x, 2.5));
  }
  EXPECT_NEAR(loglog_slope(d, v), 2.5, 1e-12);
  EXPECT_NEAR(unit_ball_volume(3), 4.0 * kPi / 3.0, 1e-14);
}
