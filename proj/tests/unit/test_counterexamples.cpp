#include "bpplab/counterexamples.hpp"
#include "bpplab/fields.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace bpplab;

namespace {

// The annulus Hessian diagonal as printed in closed form, written out
// independently of the library.
double printed_diagonal(const Vector& x, int i) {
  const double s = 1.0 - x.squaredNorm();
  return (4.0 * x(i) * x(i) - 8.0 * x(i) * x(i) * s - 2.0 * s * s) * std::exp(-1.0 / s) /
         std::pow(s, 4);
}

const CaseCheck& find(const CaseReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("missing check " + name);
}

}  // namespace

TEST(Cases, KeysRoundTrip) {
  for (CaseId id : all_cases()) EXPECT_EQ(parse_case(case_key(id)), id);
  EXPECT_THROW(parse_case("ex9_9"), ParseError);
}

TEST(Cases, EveryCaseMatchesItsExpectedPattern) {
  for (CaseId id : all_cases()) {
    const auto study = instantiate(id);
    const auto report = evaluate(study);
    EXPECT_TRUE(report.matches_expected()) << report.to_json().dump(2);
    EXPECT_TRUE(std::is_sorted(report.checks.begin(), report.checks.end(),
                               [](const auto& a, const auto& b) { return a.name < b.name; }));
    // exactly one hypothesis is expected to fail
    int failing = 0;
    for (const auto& c : report.checks) failing += c.kind == "hypothesis" && !c.expected;
    EXPECT_EQ(failing, 1) << study.key;
  }
}

TEST(Cases, MismatchRaises) {
  auto study = instantiate(CaseId::kUnboundedHessian);
  study.expected["v_hessian_bounded"] = true;
  try {
    verify(study, {500, 0});
    FAIL() << "expected a mismatch";
  } catch (const CaseMismatchError& e) {
    EXPECT_FALSE(e.report().matches_expected());
  }
}

TEST(Cases, UnboundedHessianCaseDetails) {
  const auto s = instantiate(CaseId::kUnboundedHessian);
  for (double x : {1e-6, 0.01, 0.3, 0.99}) {
    const Vector p = make_vector({x});
    const Matrix a = s.q.principal_at(p, s.u.value(p), s.u.gradient(p));
    EXPECT_NEAR(a(0, 0), 2.0, 1e-12);
    // A(x, v, Dv) = 0, so Q[v] = 0
    EXPECT_NEAR(apply_quasilinear(s.q, s.v, p), 0.0, 1e-12 * (1.0 + 1.5 / std::sqrt(x)));
    EXPECT_NEAR(s.v.hessian(p)(0, 0), 1.5 / std::sqrt(x), 1e-12 / std::sqrt(x));
  }
  const auto r = evaluate(s);
  EXPECT_NEAR(find(r, "weight_integrable").margin, 2.0 * std::sqrt(2.0), 1e-12);
  const auto& hess = find(r, "v_hessian_bounded");
  EXPECT_NEAR(hess.detail.at("exponent").get<double>(), -0.5, 1e-6);
  EXPECT_NEAR(s.u.gradient(s.x_b).dot(s.normal), 0.0, 1e-15);
}

TEST(Cases, DiskCaseSolvesItsEquation) {
  for (CaseId id : {CaseId::kLocalLowerLipschitz, CaseId::kInfiniteOrderDisk}) {
    const auto s = instantiate(id);
    for (const auto& x : s.sample(500, 3)) {
      EXPECT_NEAR(apply_quasilinear(s.q, s.v, x), 0.0,
                  1e-10 * (1.0 + std::abs(s.v.hessian(x).trace())));
      EXPECT_EQ(apply_quasilinear(s.q, s.u, x), 0.0);
    }
  }
  // ∂_ν v at x_b from v_r = -4r(1 - r²)
  const auto s = instantiate(CaseId::kLocalLowerLipschitz);
  EXPECT_EQ(s.v.gradient(s.x_b).dot(s.normal), 0.0);
}

TEST(Cases, AnnulusLaplacianPositiveAndHessianMatchesPrintedForm) {
  const auto s = instantiate(CaseId::kInfiniteOrderAnnulus);
  for (const auto& x : s.sample(1000, 9)) {
    EXPECT_GT(x.norm(), 0.9);
    EXPECT_LT(x.norm(), 1.0);
    EXPECT_GT(s.laplacian_over_v(x), 0.0);
    const Matrix h = s.v.hessian(x);
    for (int i = 0; i < 2; ++i) {
      EXPECT_NEAR(h(i, i), printed_diagonal(x, i), 1e-10 * h.cwiseAbs().maxCoeff());
    }
  }
}

TEST(Cases, ExponentialBumpHessianAgainstDifferences) {
  const auto s = instantiate(CaseId::kInfiniteOrderAnnulus);
  for (const auto& x : s.sample(400, 2)) {
    if (x.norm() > 0.95) continue;
    Matrix printed = s.v.hessian(x);
    for (int i = 0; i < 2; ++i) printed(i, i) = printed_diagonal(x, i);
    const Matrix fd = finite_difference_hessian(s.v, x, 1e-4, 4);
    EXPECT_LE((fd - printed).cwiseAbs().maxCoeff() / printed.cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(ZeroOrder, PowerLawsAndExponential) {
  auto cube = zero_order_estimate([](double d) { return d * d * d; });
  EXPECT_NEAR(cube.order, 3.0, 0.05);
  EXPECT_FALSE(cube.numerically_infinite);
  auto half = zero_order_estimate([](double d) { return std::pow(d, 1.5); });
  EXPECT_NEAR(half.order, 1.5, 0.05);
  auto flat = zero_order_estimate([](double d) { return std::exp(-1.0 / d); });
  EXPECT_TRUE(flat.numerically_infinite);
  EXPECT_GT(flat.order, 20.0);
  EXPECT_THROW(zero_order_estimate([](double d) { return d - 0.1; }), DomainError);
}

TEST(ZeroOrder, GeometricDistances) {
  const auto d = geometric_distances(0.5, 0.8, 4);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_DOUBLE_EQ(d[3], 0.5 * 0.8 * 0.8 * 0.8);
  EXPECT_THROW(geometric_distances(0.5, 1.2, 4), PreconditionError);
}

TEST(CollarTable, GrowthLikeInverseSquare) {
  const std::vector<double> widths{1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3};
  const auto t = collar_lipschitz_growth(widths);
  EXPECT_NEAR(t.M, 8.0, 1e-12);
  EXPECT_NEAR(t.v_nu_nu, 8.0, 1e-12);
  EXPECT_NEAR(t.fitted_exponent, -2.0, 0.1);
  for (const auto& row : t.rows) {
    // oracle: inf over B_{1-δ} of (1 - r²)² is attained at r = 1 - δ
    const double s = 1.0 - (1.0 - row.width) * (1.0 - row.width);
    EXPECT_NEAR(row.inf_v, s * s, 1e-15);
    EXPECT_NEAR(row.M_K, 16.0 / (s * s), 1e-9 * row.M_K);
    EXPECT_GE(row.M_K, row.lower_bound);
  }
  const auto doubled = collar_lipschitz_growth(widths, 16.0);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    EXPECT_NEAR(doubled.rows[i].M_K, 2.0 * t.rows[i].M_K, 1e-9 * t.rows[i].M_K);
  }
}
