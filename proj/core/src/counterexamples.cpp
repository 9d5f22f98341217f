#include "bpplab/counterexamples.hpp"

#include "bpplab/geometry.hpp"
#include "bpplab/parallel.hpp"
#include "bpplab/weight.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace bpplab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFdStep = 1e-4;
constexpr int kFdOrder = 4;
constexpr double kFdTolerance = 1e-6;
constexpr double kChainTolerance = 1e-10;
constexpr double kNormalTolerance = 1e-8;
constexpr double kResidualTolerance = 1e-10;
// A fitted collar exponent above this counts as bounded growth.
constexpr double kBoundedExponent = -0.05;
// Required weights growing like d^p are integrable iff p > -1; the fit must
// clear -1 by this much.
constexpr double kIntegrableExponent = -0.95;

std::vector<double> decades(double coarse, double fine, int per_decade) {
  std::vector<double> out;
  const int steps = static_cast<int>(std::round(std::log10(coarse / fine) * per_decade));
  for (int k = 0; k <= steps; ++k) {
    out.push_back(coarse * std::pow(10.0, -static_cast<double>(k) / per_decade));
  }
  return out;
}

std::vector<Vector> circle(double radius, int count) {
  std::vector<Vector> out;
  for (int k = 0; k < count; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / count;
    out.push_back(make_vector({radius * std::cos(phi), radius * std::sin(phi)}));
  }
  return out;
}

// v = (1 - |x|²)²
AnalyticField quartic_bump(int n) {
  return AnalyticField(
      n,
      [](const Vector& x) {
        const double s = 1.0 - x.squaredNorm();
        return s * s;
      },
      [](const Vector& x) { return (-4.0 * (1.0 - x.squaredNorm()) * x).eval(); },
      [n](const Vector& x) {
        const double s = 1.0 - x.squaredNorm();
        return (-4.0 * s * Matrix::Identity(n, n) + 8.0 * x * x.transpose()).eval();
      });
}

// v = exp(-1/(1 - |x|²)) inside the unit ball, 0 on and outside it.
AnalyticField exp_bump(int n) {
  return AnalyticField(
      n,
      [](const Vector& x) {
        const double s = 1.0 - x.squaredNorm();
        return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
      },
      [n](const Vector& x) -> Vector {
        const double s = 1.0 - x.squaredNorm();
        if (s <= 0.0) return Vector::Zero(n);
        return -2.0 * std::exp(-1.0 / s) / (s * s) * x;
      },
      [n](const Vector& x) -> Matrix {
        const double s = 1.0 - x.squaredNorm();
        if (s <= 0.0) return Matrix::Zero(n, n);
        const Matrix xx = x * x.transpose();
        return std::exp(-1.0 / s) / std::pow(s, 4) *
               (4.0 * xx - 8.0 * s * xx - 2.0 * s * s * Matrix::Identity(n, n));
      });
}

// Hessian of exp(g), g = -1/s, assembled as v (∇g ∇gᵀ + ∇²g).
Matrix exp_bump_chain_rule(const Vector& x) {
  const int n = static_cast<int>(x.size());
  const double s = 1.0 - x.squaredNorm();
  const Vector dg = -2.0 * x / (s * s);
  const Matrix d2g = -2.0 / (s * s) * Matrix::Identity(n, n) -
                     8.0 / (s * s * s) * x * x.transpose();
  return std::exp(-1.0 / s) * (dg * dg.transpose() + d2g);
}

// Diagonal entries as printed for the annulus example.
double exp_bump_printed_diagonal(const Vector& x, int i) {
  const double s = 1.0 - x.squaredNorm();
  const double xi2 = x(i) * x(i);
  return (4.0 * xi2 - 8.0 * xi2 * s - 2.0 * s * s) * std::exp(-1.0 / s) /
         std::pow(s, 4);
}

AnalyticField scaled_power(double scale, double exponent) {
  return AnalyticField(
      1, [=](const Vector& x) { return scale * std::pow(x(0), exponent); },
      [=](const Vector& x) {
        return make_vector({scale * exponent * std::pow(x(0), exponent - 1.0)});
      },
      [=](const Vector& x) {
        Matrix h(1, 1);
        h(0, 0) = scale * exponent * (exponent - 1.0) * std::pow(x(0), exponent - 2.0);
        return h;
      });
}

QuasilinearData laplacian_with_b(int n, std::function<double(const Vector&)> lap_over_v,
                                 QuasilinearData::Form form) {
  QuasilinearData q;
  q.form = form;
  q.dimension = n;
  if (form == QuasilinearData::Form::kNonDivergence) {
    q.principal = [n](const Vector&, double, const Vector&) {
      return Matrix::Identity(n, n).eval();
    };
  } else {
    q.flux = [](const Vector&, double, const Vector& eta) { return eta; };
    q.flux_z = [n](const Vector&, double, const Vector&) { return Vector::Zero(n).eval(); };
    q.flux_eta = [n](const Vector&, double, const Vector&) {
      return Matrix::Identity(n, n).eval();
    };
  }
  q.lower_order = [lap_over_v](const Vector& x, double z, const Vector&) {
    return -z * lap_over_v(x);
  };
  return q;
}

std::vector<Vector> annulus_points(double inner, double outer, std::size_t count,
                                   double d_min, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double width = outer - inner;
  std::vector<Vector> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    const double u = unit(rng);
    double d = i % 2 == 0 ? d_min * std::pow(width / d_min, u) : d_min + (width - d_min) * u;
    d = std::min(d, width * (1.0 - 1e-9));
    const double r = outer - d;
    out.push_back(make_vector({r * std::cos(phi), r * std::sin(phi)}));
  }
  return out;
}

std::vector<Vector> unit_interval_points(std::size_t count, double x_min,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double u = unit(rng);
    const double x = i % 2 == 0 ? x_min * std::pow(1.0 / x_min, u) : x_min + (1.0 - x_min) * u;
    out.push_back(make_vector({std::min(x, 1.0 - 1e-12)}));
  }
  return out;
}

// Worst per-sample value of f together with a per-sample pass flag.
struct SampleScan {
  double worst = kInf;
  bool pass = true;
};

template <typename Fn>
SampleScan scan(const std::vector<Vector>& xs, Fn&& fn) {
  std::vector<std::pair<double, bool>> vals(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { vals[i] = fn(xs[i]); });
  SampleScan s;
  for (const auto& [value, ok] : vals) {
    s.worst = std::min(s.worst, value);
    s.pass = s.pass && ok;
  }
  return s;
}

double relative_matrix_error(const Matrix& approx, const Matrix& exact) {
  const double scale = exact.cwiseAbs().maxCoeff();
  const double err = (approx - exact).cwiseAbs().maxCoeff();
  return scale > 0.0 ? err / scale : err;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string case_key(CaseId id) {
  switch (id) {
    case CaseId::kLocalLowerLipschitz: return "ex2_9";
    case CaseId::kUnboundedHessian: return "ex2_12";
    case CaseId::kInfiniteOrderDisk: return "ex3_2";
    case CaseId::kInfiniteOrderAnnulus: return "ex3_4";
  }
  return "unknown";
}

CaseId parse_case(const std::string& key) {
  for (CaseId id : all_cases()) {
    if (case_key(id) == key) return id;
  }
  throw ParseError("unknown case '" + key + "' (expected ex2_9, ex2_12, ex3_2 or ex3_4)");
}

std::vector<CaseId> all_cases() {
  return {CaseId::kLocalLowerLipschitz, CaseId::kUnboundedHessian,
          CaseId::kInfiniteOrderDisk, CaseId::kInfiniteOrderAnnulus};
}

CaseStudy instantiate(CaseId id) {
  const Ball unit_disk{make_vector({0.0, 0.0}), 1.0};
  const Vector x_b = make_vector({1.0, 0.0});
  switch (id) {
    case CaseId::kLocalLowerLipschitz: {
      auto lap_over_v = [](const Vector& x) {
        const double s = 1.0 - x.squaredNorm();
        return (-4.0 * x.size() * s + 8.0 * x.squaredNorm()) / (s * s);
      };
      return CaseStudy{
          .id = id,
          .key = case_key(id),
          .description = "B only locally lower Lipschitz in z: u = 0, "
                         "v = (1 - |x|^2)^2 on the unit disk, A = I, "
                         "B = -z (sum v_ii) / v",
          .dimension = 2,
          .u = AnalyticField::zero(2),
          .v = quartic_bump(2),
          .q = laplacian_with_b(2, lap_over_v, QuasilinearData::Form::kNonDivergence),
          .x_b = x_b,
          .normal = x_b,
          .tangent_ball = unit_disk,
          .laplacian_over_v = lap_over_v,
          .sample = [unit_disk](std::size_t count, std::uint64_t seed) {
            return graded_ball_samples(unit_disk, count, 1e-6, seed);
          },
          .collar = [](double delta) { return circle(1.0 - delta, 64); },
          .collar_widths = decades(1e-1, 1e-6, 2),
          .fd_resolved = [](const Vector&) { return true; },
          .expected = {{"A_lipschitz_with_integrable_weight", true},
                       {"B_lower_lipschitz_integrable", false},
                       {"Q_u_nonnegative", true},
                       {"Q_v_nonpositive", true},
                       {"elliptic_wrt_u", true},
                       {"hessian_matches_finite_differences", true},
                       {"normal_derivatives_equal", true},
                       {"touch_at_boundary", true},
                       {"u_less_than_v", true},
                       {"v_hessian_bounded", true}},
      };
    }
    case CaseId::kUnboundedHessian: {
      QuasilinearData q;
      q.dimension = 1;
      q.principal = [](const Vector& x, double z, const Vector&) {
        const double p = std::pow(x(0), 1.5);
        Matrix a(1, 1);
        a(0, 0) = 1.0 + 2.0 / p * (1.5 * p - z);
        return a;
      };
      q.lower_order = [](const Vector&, double, const Vector&) { return 0.0; };
      const Ball tangent{make_vector({0.5}), 0.5};
      return CaseStudy{
          .id = id,
          .key = case_key(id),
          .description = "unbounded second derivatives of v: u = x^{3/2}, "
                         "v = 2x^{3/2} on (0, 1), A = 1 + (2/x^{3/2})(3x^{3/2}/2 - z), B = 0",
          .dimension = 1,
          .u = scaled_power(1.0, 1.5),
          .v = scaled_power(2.0, 1.5),
          .q = q,
          .x_b = make_vector({0.0}),
          .normal = make_vector({-1.0}),
          .tangent_ball = tangent,
          .laplacian_over_v = {},
          .sample = [](std::size_t count, std::uint64_t seed) {
            return unit_interval_points(count, 1e-8, seed);
          },
          .collar = [](double delta) { return std::vector<Vector>{make_vector({delta})}; },
          .collar_widths = decades(1e-1, 1e-8, 2),
          .fd_resolved = [](const Vector& x) { return x(0) >= 0.01; },
          .expected = {{"A_lipschitz_with_integrable_weight", true},
                       {"B_lower_lipschitz_integrable", true},
                       {"Q_u_nonnegative", true},
                       {"Q_v_nonpositive", true},
                       {"elliptic_wrt_u", true},
                       {"hessian_matches_finite_differences", true},
                       {"normal_derivatives_equal", true},
                       {"touch_at_boundary", true},
                       {"u_less_than_v", true},
                       {"v_hessian_bounded", false},
                       {"weight_integrable", true}},
      };
    }
    case CaseId::kInfiniteOrderDisk:
    case CaseId::kInfiniteOrderAnnulus: {
      auto lap_over_v = [](const Vector& x) {
        const double r2 = x.squaredNorm();
        const double s = 1.0 - r2;
        return (4.0 * r2 - 8.0 * r2 * s - 2.0 * x.size() * s * s) / std::pow(s, 4);
      };
      const bool disk = id == CaseId::kInfiniteOrderDisk;
      CaseStudy study{
          .id = id,
          .key = case_key(id),
          .description = disk ? "zero of infinite order: divergence form A = eta, "
                                "B = -z (sum v_ii) / v, u = 0, v = exp(-1/(1 - |x|^2)) "
                                "on the unit disk"
                              : "zero of infinite order on the annulus 0.9 < |x| < 1 "
                                "with B non-increasing in z: A = eta, "
                                "B = -z (sum v_ii) / v, u = 0, v = exp(-1/(1 - |x|^2))",
          .dimension = 2,
          .u = AnalyticField::zero(2),
          .v = exp_bump(2),
          .q = laplacian_with_b(2, lap_over_v, QuasilinearData::Form::kDivergence),
          .x_b = x_b,
          .normal = x_b,
          .tangent_ball = disk ? unit_disk : Ball{make_vector({0.95, 0.0}), 0.05},
          .laplacian_over_v = lap_over_v,
          .sample = {},
          .collar = [](double delta) { return circle(1.0 - delta, 64); },
          .collar_widths = decades(disk ? 1e-1 : 5e-2, 1e-3, 4),
          .fd_resolved = {},
          .expected = {},
      };
      if (disk) {
        study.sample = [unit_disk](std::size_t count, std::uint64_t seed) {
          return graded_ball_samples(unit_disk, count, 1e-3, seed);
        };
        study.fd_resolved = [](const Vector& x) { return x.norm() <= 0.95; };
        study.expected = {{"A_eta_uniformly_continuous", true},
                          {"A_z_bounded", true},
                          {"B_uniform_lower_lipschitz", false},
                          {"Q_u_nonnegative", true},
                          {"Q_v_nonpositive", true},
                          {"elliptic_wrt_u", true},
                          {"hessian_closed_form_vs_chain_rule", true},
                          {"hessian_matches_finite_differences", true},
                          {"touch_at_boundary", true},
                          {"u_less_than_v", true},
                          {"zero_order_infinite", true}};
      } else {
        study.sample = [](std::size_t count, std::uint64_t seed) {
          return annulus_points(0.9, 1.0, count, 1e-3, seed);
        };
        study.fd_resolved = [](const Vector& x) { return x.norm() <= 0.95; };
        study.expected = {{"A_locally_bounded", true},
                          {"B_locally_lower_lipschitz", true},
                          {"B_nonincreasing_in_z", true},
                          {"B_uniform_lower_lipschitz", false},
                          {"Q_u_nonnegative", true},
                          {"Q_v_nonpositive", true},
                          {"elliptic_wrt_u", true},
                          {"hessian_closed_form_vs_chain_rule", true},
                          {"hessian_matches_finite_differences", true},
                          {"touch_at_boundary", true},
                          {"u_less_than_v", true},
                          {"zero_order_infinite", true}};
      }
      return study;
    }
  }
  throw ParseError("unknown case id");
}

// ---------------------------------------------------------------------------

nlohmann::json CaseCheck::to_json() const {
  nlohmann::json j = {{"name", name},
                      {"kind", kind},
                      {"expected", expected},
                      {"observed", observed},
                      {"margin", margin}};
  if (!detail.is_null()) j["detail"] = detail;
  return j;
}

bool CaseReport::matches_expected() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CaseCheck& c) { return c.expected == c.observed; });
}

nlohmann::json CaseReport::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : checks) cs.push_back(c.to_json());
  return {{"id", id},
          {"description", description},
          {"matches_expected", matches_expected()},
          {"checks", cs}};
}

CaseMismatchError::CaseMismatchError(CaseReport report)
    : Error("case " + report.id + ": observed checks contradict the expected pattern"),
      report_(std::move(report)) {}

nlohmann::json CollarGrowth::to_json() const {
  return {{"widths", widths}, {"sups", sups}, {"exponent", exponent}};
}

CollarGrowth collar_growth(const CaseStudy& study,
                           const std::function<double(const Vector&)>& g) {
  CollarGrowth out;
  out.widths = study.collar_widths;
  for (double delta : study.collar_widths) {
    double sup = -kInf;
    for (const Vector& x : study.collar(delta)) sup = std::max(sup, g(x));
    out.sups.push_back(sup);
  }
  const bool positive = std::all_of(out.sups.begin(), out.sups.end(),
                                    [](double s) { return s > 0.0; });
  // A collar quantity that vanishes somewhere cannot blow up like a power.
  out.exponent = positive ? loglog_slope(out.widths, out.sups) : 0.0;
  return out;
}

namespace {

CaseCheck make_check(const CaseStudy& study, const std::string& name,
                     const std::string& kind, bool observed, double margin,
                     nlohmann::json detail = nullptr) {
  const auto it = study.expected.find(name);
  if (it == study.expected.end()) {
    throw PreconditionError("case " + study.key + " has no expectation for " + name);
  }
  return {name, kind, it->second, observed, margin, std::move(detail)};
}

// Per-sample Q[w] with the size of its terms, for relative tolerances.
std::pair<double, double> quasilinear_with_scale(const QuasilinearData& q,
                                                 const AnalyticField& w,
                                                 const Vector& x) {
  const double total = apply_quasilinear(q, w, x);
  const double lower = q.lower_order ? q.lower_order(x, w.value(x), w.gradient(x)) : 0.0;
  return {total, std::abs(total - lower) + std::abs(lower)};
}

double sup_gradient(const AnalyticField& f, const std::vector<Vector>& xs) {
  double m = 0.0;
  for (const auto& x : xs) m = std::max(m, f.gradient(x).cwiseAbs().maxCoeff());
  return m;
}

double sup_value(const AnalyticField& f, const std::vector<Vector>& xs) {
  double m = 0.0;
  for (const auto& x : xs) m = std::max(m, std::abs(f.value(x)));
  return m;
}

}  // namespace

CaseReport evaluate(const CaseStudy& study, const VerifyBudget& budget) {
  const auto samples = study.sample(budget.samples, budget.seed);
  const int n = study.dimension;
  std::vector<CaseCheck> checks;

  // --- hypotheses shared by every case -------------------------------------
  {
    const auto s = scan(samples, [&](const Vector& x) {
      const double gap = study.v.value(x) - study.u.value(x);
      return std::pair{gap, gap > 0.0};
    });
    checks.push_back(make_check(study, "u_less_than_v", "hypothesis", s.pass, s.worst));
  }
  {
    const double diff = std::abs(study.u.value(study.x_b) - study.v.value(study.x_b));
    checks.push_back(make_check(study, "touch_at_boundary", "hypothesis",
                                diff <= 1e-14, -diff));
  }
  {
    const auto s = scan(samples, [&](const Vector& x) {
      const auto [q, scale] = quasilinear_with_scale(study.q, study.u, x);
      return std::pair{q, q >= -kResidualTolerance * (1.0 + scale)};
    });
    checks.push_back(make_check(study, "Q_u_nonnegative", "hypothesis", s.pass, s.worst));
  }
  {
    const auto s = scan(samples, [&](const Vector& x) {
      const auto [q, scale] = quasilinear_with_scale(study.q, study.v, x);
      return std::pair{-q, -q >= -kResidualTolerance * (1.0 + scale)};
    });
    checks.push_back(make_check(study, "Q_v_nonpositive", "hypothesis", s.pass, s.worst));
  }
  {
    const auto s = scan(samples, [&](const Vector& x) {
      const Matrix a = study.q.principal_at(x, study.u.value(x), study.u.gradient(x));
      const Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
      const double lo = eig.eigenvalues().minCoeff();
      return std::pair{lo, lo > 0.0};
    });
    checks.push_back(make_check(study, "elliptic_wrt_u", "hypothesis", s.pass, s.worst));
  }

  // --- case-specific hypotheses ---------------------------------------------
  const double M_z = std::max(sup_value(study.u, samples), sup_value(study.v, samples));
  const double M_eta =
      std::max(sup_gradient(study.u, samples), sup_gradient(study.v, samples));
  const LipschitzSampling lip_sampling{budget.samples, 1e-8, budget.seed};

  switch (study.id) {
    case CaseId::kLocalLowerLipschitz: {
      const auto weight = RadialWeight::constant(1.0);
      const auto lip = lower_lipschitz_check(study.q, weight, study.tangent_ball,
                                             {M_z, M_eta}, lip_sampling);
      checks.push_back(make_check(study, "A_lipschitz_with_integrable_weight",
                                  "hypothesis", lip.principal.pass,
                                  lip.principal.worst_margin,
                                  {{"weight", weight.describe()}}));

      // Weight needed for the lower-Lipschitz bound: Λ(d) >= d · Σv_ii / v.
      const auto required = collar_growth(study, [&](const Vector& x) {
        return study.tangent_ball.boundary_distance(x) *
               std::max(0.0, study.laplacian_over_v(x));
      });
      nlohmann::json panel = nlohmann::json::array();
      for (const auto& w : {RadialWeight::constant(1.0), RadialWeight::power(1.0, 0.5),
                            RadialWeight::power(10.0, 0.9)}) {
        const auto r = lower_lipschitz_check(study.q, w, study.tangent_ball,
                                             {M_z, M_eta}, lip_sampling);
        panel.push_back({{"weight", w.describe()},
                         {"pass", r.lower_order.pass},
                         {"worst_margin", r.lower_order.worst_margin}});
      }
      checks.push_back(make_check(
          study, "B_lower_lipschitz_integrable", "hypothesis",
          required.exponent > kIntegrableExponent,
          required.exponent - kIntegrableExponent,
          {{"required_weight", required.to_json()}, {"integrable_weight_panel", panel}}));

      const auto hess = collar_growth(study, [&](const Vector& x) {
        return study.v.hessian(x).cwiseAbs().maxCoeff();
      });
      checks.push_back(make_check(study, "v_hessian_bounded", "hypothesis",
                                  hess.exponent >= kBoundedExponent,
                                  hess.exponent - kBoundedExponent, hess.to_json()));
      break;
    }
    case CaseId::kUnboundedHessian: {
      const auto weight = RadialWeight::power(2.0, 0.5, 0.5);
      const auto lip = lower_lipschitz_check(study.q, weight, study.tangent_ball,
                                             {M_z, M_eta}, lip_sampling);
      const double integral = weight.integrate_first(0.5);
      const bool integrable = std::isfinite(integral);
      checks.push_back(make_check(
          study, "A_lipschitz_with_integrable_weight", "hypothesis",
          lip.principal.pass && integrable, lip.principal.worst_margin,
          {{"weight", weight.describe()}, {"M_z", M_z}, {"M_eta", M_eta}}));
      checks.push_back(make_check(study, "B_lower_lipschitz_integrable", "hypothesis",
                                  lip.lower_order.pass && integrable,
                                  lip.lower_order.worst_margin));
      checks.push_back(make_check(study, "weight_integrable", "hypothesis", integrable,
                                  integral, {{"integral_to_half", integral}}));
      const auto hess = collar_growth(study, [&](const Vector& x) {
        return study.v.hessian(x).cwiseAbs().maxCoeff();
      });
      checks.push_back(make_check(study, "v_hessian_bounded", "hypothesis",
                                  hess.exponent >= kBoundedExponent,
                                  hess.exponent - kBoundedExponent, hess.to_json()));
      break;
    }
    case CaseId::kInfiniteOrderDisk:
    case CaseId::kInfiniteOrderAnnulus: {
      // z-Lipschitz constant B needs on each collar: max(0, Σv_ii / v).
      const auto required = collar_growth(study, [&](const Vector& x) {
        return std::max(0.0, study.laplacian_over_v(x));
      });
      checks.push_back(make_check(study, "B_uniform_lower_lipschitz", "hypothesis",
                                  required.exponent >= kBoundedExponent,
                                  required.exponent - kBoundedExponent,
                                  required.to_json()));
      std::mt19937_64 rng(budget.seed + 17);
      std::uniform_real_distribution<double> eta_dist(-M_eta, M_eta);
      std::uniform_real_distribution<double> z_dist(-M_z, M_z);
      if (study.id == CaseId::kInfiniteOrderDisk) {
        double a_z = 0.0, modulus = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
          Vector eta(n), eta2(n);
          for (int k = 0; k < n; ++k) eta(k) = eta_dist(rng);
          for (int k = 0; k < n; ++k) eta2(k) = eta(k) + 1e-6 * (2.0 * (eta_dist(rng) > 0) - 1.0);
          const double z = z_dist(rng);
          a_z = std::max(a_z, study.q.flux_z(samples[i], z, eta).cwiseAbs().maxCoeff());
          modulus = std::max(modulus, (study.q.flux_eta(samples[i], z, eta) -
                                       study.q.flux_eta(samples[i], z, eta2))
                                          .cwiseAbs()
                                          .maxCoeff());
        }
        checks.push_back(make_check(study, "A_z_bounded", "hypothesis",
                                    std::isfinite(a_z), -a_z, {{"sup_A_z", a_z}}));
        checks.push_back(make_check(study, "A_eta_uniformly_continuous", "hypothesis",
                                    modulus <= 1e-8, -modulus,
                                    {{"modulus_at_1e-6", modulus}}));
      } else {
        const auto s = scan(samples, [&](const Vector& x) {
          const double l = study.laplacian_over_v(x);
          return std::pair{l, l > 0.0};
        });
        checks.push_back(make_check(study, "B_nonincreasing_in_z", "hypothesis", s.pass,
                                    s.worst, {{"min_laplacian_over_v", s.worst}}));
        const bool local = std::all_of(required.sups.begin(), required.sups.end(),
                                       [](double v) { return std::isfinite(v); });
        checks.push_back(make_check(study, "B_locally_lower_lipschitz", "hypothesis",
                                    local, required.sups.back(), required.to_json()));
        double sup_a = 0.0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
          Vector eta(n);
          for (int k = 0; k < n; ++k) eta(k) = eta_dist(rng);
          sup_a = std::max(sup_a, study.q.flux(samples[i], 0.0, eta).norm());
        }
        checks.push_back(make_check(study, "A_locally_bounded", "hypothesis",
                                    std::isfinite(sup_a), sup_a,
                                    {{"sup_A", sup_a}, {"M_eta", M_eta}}));
      }
      break;
    }
  }

  // --- conclusions ------------------------------------------------------------
  if (study.expected.count("normal_derivatives_equal")) {
    const double du = study.u.gradient(study.x_b).dot(study.normal);
    const double dv = study.v.gradient(study.x_b).dot(study.normal);
    const double diff = std::abs(du - dv);
    checks.push_back(make_check(study, "normal_derivatives_equal", "conclusion",
                                diff <= kNormalTolerance, kNormalTolerance - diff,
                                {{"du_dnu", du}, {"dv_dnu", dv}}));
  }
  if (study.expected.count("zero_order_infinite")) {
    ZeroOrderOptions opts;
    if (study.id == CaseId::kInfiniteOrderAnnulus) {
      opts.d0 = 0.09;
      opts.count = 16;
    }
    const auto est = zero_order_estimate(
        [&](double d) {
          const Vector x = study.x_b - d * study.normal;
          return study.v.value(x) - study.u.value(x);
        },
        opts);
    checks.push_back(make_check(study, "zero_order_infinite", "conclusion",
                                est.numerically_infinite, est.order - opts.threshold,
                                est.to_json()));
  }

  // --- diagnostics --------------------------------------------------------------
  {
    std::vector<Vector> resolved;
    for (const auto& x : samples) {
      if (study.fd_resolved(x)) resolved.push_back(x);
      if (resolved.size() >= 400) break;
    }
    double worst = 0.0;
    for (const auto& x : resolved) {
      worst = std::max(worst, relative_matrix_error(
                                  finite_difference_hessian(study.v, x, kFdStep, kFdOrder),
                                  study.v.hessian(x)));
    }
    checks.push_back(make_check(study, "hessian_matches_finite_differences", "diagnostic",
                                !resolved.empty() && worst <= kFdTolerance,
                                kFdTolerance - worst,
                                {{"points", resolved.size()},
                                 {"step", kFdStep},
                                 {"order", kFdOrder},
                                 {"max_relative_error", worst}}));
  }
  if (study.expected.count("hessian_closed_form_vs_chain_rule")) {
    double worst = 0.0;
    for (const auto& x : samples) {
      const Matrix h = study.v.hessian(x);
      worst = std::max(worst, relative_matrix_error(exp_bump_chain_rule(x), h));
      Matrix printed = h;
      for (int i = 0; i < n; ++i) printed(i, i) = exp_bump_printed_diagonal(x, i);
      worst = std::max(worst, relative_matrix_error(printed, h));
    }
    checks.push_back(make_check(study, "hessian_closed_form_vs_chain_rule", "diagnostic",
                                worst <= kChainTolerance, kChainTolerance - worst,
                                {{"max_relative_error", worst}}));
  }

  std::sort(checks.begin(), checks.end(),
            [](const CaseCheck& a, const CaseCheck& b) { return a.name < b.name; });
  if (checks.size() != study.expected.size()) {
    throw PreconditionError("case " + study.key + ": expectation map and checks differ");
  }
  return {study.key, study.description, std::move(checks)};
}

CaseReport verify(const CaseStudy& study, const VerifyBudget& budget) {
  CaseReport report = evaluate(study, budget);
  if (!report.matches_expected()) throw CaseMismatchError(std::move(report));
  return report;
}

// ---------------------------------------------------------------------------

nlohmann::json ZeroOrderEstimate::to_json() const {
  return {{"distances", distances},
          {"slopes", slopes},
          {"order", order},
          {"numerically_infinite", numerically_infinite}};
}

std::vector<double> geometric_distances(double d0, double kappa, std::size_t count) {
  if (!(d0 > 0.0) || !(kappa > 0.0 && kappa < 1.0) || count < 2) {
    throw PreconditionError("geometric distances need d0 > 0, kappa in (0,1), count >= 2");
  }
  std::vector<double> out;
  double d = d0;
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(d);
    d *= kappa;
  }
  return out;
}

ZeroOrderEstimate zero_order_estimate(const std::function<double(double)>& w,
                                      const std::vector<double>& distances,
                                      std::size_t window, double threshold) {
  if (window < 2 || distances.size() < window) {
    throw PreconditionError("zero_order_estimate: need at least one full window");
  }
  ZeroOrderEstimate est;
  est.distances = distances;
  for (double d : distances) {
    const double value = w(d);
    if (!(value > 0.0)) {
      throw DomainError("zero_order_estimate: w must be positive (got " +
                        std::to_string(value) + " at distance " + std::to_string(d) + ")");
    }
    est.values.push_back(value);
  }
  for (std::size_t start = 0; start + window <= distances.size(); ++start) {
    const std::vector<double> d(distances.begin() + start,
                                distances.begin() + start + window);
    const std::vector<double> v(est.values.begin() + start,
                                est.values.begin() + start + window);
    est.slopes.push_back(loglog_slope(d, v));
  }
  est.order = est.slopes.back();
  bool increasing = est.slopes.size() >= 2;
  for (std::size_t k = 1; k < est.slopes.size(); ++k) {
    if (!(est.slopes[k] > est.slopes[k - 1])) increasing = false;
  }
  est.numerically_infinite = est.order > threshold && increasing;
  return est;
}

ZeroOrderEstimate zero_order_estimate(const std::function<double(double)>& w,
                                      const ZeroOrderOptions& options) {
  return zero_order_estimate(w, geometric_distances(options.d0, options.kappa, options.count),
                             options.window, options.threshold);
}

// ---------------------------------------------------------------------------

nlohmann::json CollarLipschitzTable::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"width", r.width}, {"inf_v", r.inf_v}, {"M_K", r.M_K},
                         {"lower_bound", r.lower_bound}});
  }
  return {{"M", M}, {"v_nu_nu", v_nu_nu}, {"rows", rows_json},
          {"fitted_exponent", fitted_exponent}};
}

CollarLipschitzTable collar_lipschitz_growth(const std::vector<double>& widths,
                                             std::optional<double> M) {
  if (widths.size() < 2) throw PreconditionError("need at least two collar widths");
  const int n = 2;
  const AnalyticField v = quartic_bump(n);
  CollarLipschitzTable table;
  if (M) {
    table.M = *M;
  } else {
    for (int i = -100; i <= 100; ++i) {
      for (int j = -100; j <= 100; ++j) {
        const Vector x = make_vector({i / 100.0, j / 100.0});
        if (x.squaredNorm() > 1.0) continue;
        table.M = std::max({table.M, std::abs(v.value(x)),
                            v.gradient(x).cwiseAbs().maxCoeff(),
                            v.hessian(x).cwiseAbs().maxCoeff()});
      }
    }
  }
  // Second normal derivative at the touching point (1, 0).
  table.v_nu_nu = v.hessian(make_vector({1.0, 0.0}))(0, 0);
  std::vector<double> ws, mk;
  for (double delta : widths) {
    if (!(delta > 0.0 && delta < 1.0)) throw PreconditionError("collar width in (0, 1)");
    const double R = 1.0 - delta;
    // v is radially decreasing, so its infimum over the closed ball B_R is
    // attained on |x| = R.
    const double inf_v = v.value(make_vector({R, 0.0}));
    const double M_K = table.M * n / inf_v;
    table.rows.push_back({delta, inf_v, M_K,
                          table.M * n / (table.v_nu_nu * delta * delta)});
    ws.push_back(delta);
    mk.push_back(M_K);
  }
  table.fitted_exponent = loglog_slope(ws, mk);
  return table;
}

}  // namespace bpplab
