#include "bpplab/error.hpp"
#include "bpplab/quadrature.hpp"
#include "bpplab/weight.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace bpplab;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Weight, PointValues) {
  EXPECT_DOUBLE_EQ(RadialWeight::constant(1.0).eval(0.3), 1.0);
  EXPECT_DOUBLE_EQ(RadialWeight::power(2.0, 0.5).eval(0.25), 4.0);
  EXPECT_DOUBLE_EQ(RadialWeight::power(2.0, 0.5).eval(1.0), 2.0);
}

TEST(Weight, FirstIntegralClosedForms) {
  EXPECT_DOUBLE_EQ(RadialWeight::constant(1.0).integrate_first(0.05), 0.05);
  const auto w = RadialWeight::power(2.0, 0.5);
  EXPECT_NEAR(w.integrate_first(0.25), 2.0, 1e-15);
  EXPECT_NEAR(w.integrate_first(0.5), 2.0 * std::sqrt(2.0), 1e-14);
}

TEST(Weight, SecondIntegralClosedForms) {
  EXPECT_NEAR(RadialWeight::constant(1.0).integrate_second(0.05), 0.00125, 1e-17);
  EXPECT_NEAR(RadialWeight::power(2.0, 0.5).integrate_second(0.25), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(RadialWeight::power(3.0, 0.7).integrate_second(0.0), 0.0);
}

TEST(Weight, SecondIntegralDecaysLinearly) {
  const auto w = RadialWeight::power(1.0, 0.9);
  // I2(r)/r = average of I1 on (0, r) -> 0
  double prev = 1e300;
  for (double r = 1e-1; r > 1e-9; r *= 0.1) {
    const double ratio = w.integrate_second(r) / r;
    EXPECT_LT(ratio, prev);
    prev = ratio;
  }
}

TEST(Weight, QuadratureMatchesClosedForm) {
  for (double alpha : {0.1, 0.5, 0.9}) {
    const auto w = RadialWeight::power(1.7, alpha);
    for (double r : {1e-3, 0.3, 2.0}) {
      // Oracle written from the antiderivatives, not from the library.
      const double i1 = 1.7 * std::pow(r, 1.0 - alpha) / (1.0 - alpha);
      const double i2 = 1.7 * std::pow(r, 2.0 - alpha) / ((1.0 - alpha) * (2.0 - alpha));
      EXPECT_LT(rel(w.integrate_first_by_quadrature(r), i1), 1e-9) << alpha << " " << r;
      EXPECT_LT(rel(w.integrate_second_by_quadrature(r), i2), 1e-9) << alpha << " " << r;
    }
  }
}

TEST(Weight, TabulatedFollowsSampledSource) {
  const auto source = RadialWeight::power(2.0, 0.5);
  const auto table = RadialWeight::sampled(source, 1e-6, 1.0, 400);
  EXPECT_EQ(table.kind(), RadialWeight::Kind::kTabulated);
  // Power-law tail below the first sample is exact for a power law.
  EXPECT_LT(rel(table.eval(1e-9), source.eval(1e-9)), 1e-9);
  EXPECT_LT(rel(table.integrate_first(0.5), 2.0 * std::sqrt(2.0)), 1e-3);
  EXPECT_LT(rel(table.integrate_second(0.25), 1.0 / 3.0), 1e-3);
}

TEST(Weight, TabulatedRejectsIncreasingData) {
  EXPECT_THROW(RadialWeight::tabulated({0.1, 0.2}, {1.0, 2.0}), PreconditionError);
  EXPECT_THROW(RadialWeight::tabulated({0.1}, {1.0}), PreconditionError);
  EXPECT_THROW(RadialWeight::tabulated({0.2, 0.1}, {2.0, 1.0}), PreconditionError);
}

TEST(Weight, ParametersValidated) {
  EXPECT_THROW(RadialWeight::constant(0.0), PreconditionError);
  EXPECT_THROW(RadialWeight::power(1.0, 1.0), PreconditionError);
  EXPECT_THROW(RadialWeight::power(1.0, 0.0), PreconditionError);
  EXPECT_THROW(RadialWeight::power(-1.0, 0.5), PreconditionError);
}

TEST(Weight, OutsideSupportIsDomainError) {
  const auto w = RadialWeight::constant(1.0, 0.5);
  EXPECT_THROW(w.eval(0.6), DomainError);
  EXPECT_THROW(w.eval(0.0), DomainError);
  EXPECT_THROW(w.integrate_first(0.7), DomainError);
}

TEST(Weight, ParseSpecs) {
  EXPECT_DOUBLE_EQ(RadialWeight::parse("constant:3").eval(0.1), 3.0);
  EXPECT_DOUBLE_EQ(RadialWeight::parse("power:2,0.5").eval(0.25), 4.0);
  EXPECT_THROW(RadialWeight::parse("power:2"), ParseError);
  EXPECT_THROW(RadialWeight::parse("gaussian:1"), ParseError);
  EXPECT_THROW(RadialWeight::parse("constant:abc"), ParseError);
  EXPECT_THROW(RadialWeight::parse("file:/nonexistent/weights.csv"), ParseError);
}

TEST(Weight, CsvRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "bpplab_weight_test.csv";
  {
    std::ofstream out(path);
    out << "distance,value\n";
    for (int i = 1; i <= 50; ++i) {
      const double d = i / 50.0;
      out << d << "," << 1.0 / std::sqrt(d) << "\n";
    }
  }
  const auto w = RadialWeight::parse("file:" + path.string());
  EXPECT_EQ(w.kind(), RadialWeight::Kind::kTabulated);
  EXPECT_NEAR(w.eval(0.5), 1.0 / std::sqrt(0.5), 2e-3);
  EXPECT_NEAR(w.integrate_first(1.0), 2.0, 1e-2);
  std::filesystem::remove(path);
}

TEST(Quadrature, NonIntegrableSingularityDiverges) {
  EXPECT_THROW(graded_integral([](double t) { return 1.0 / t; }, 1.0), DivergenceError);
}

TEST(Quadrature, EndpointSingularity) {
  const auto r = graded_integral([](double t) { return std::pow(t, -0.75); }, 1.0);
  EXPECT_NEAR(r.value, 4.0, 1e-9);
}
