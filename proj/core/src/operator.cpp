#include "bpplab/operator.hpp"

#include "bpplab/error.hpp"
#include "bpplab/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace bpplab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuotientGuard = 1e-14;

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

Vector random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector y(n);
  do {
    for (int i = 0; i < n; ++i) y(i) = normal(rng);
  } while (y.norm() < 1e-12);
  return y / y.norm();
}

// Reduces per-sample (margin, point) pairs to the minimum, first index wins.
CheckOutcome reduce_margins(const std::vector<double>& margins,
                            const std::vector<Vector>& points,
                            const std::vector<char>& passed,
                            std::size_t evaluations) {
  CheckOutcome out;
  out.worst_margin = kInf;
  out.evaluations = evaluations;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    if (margins[i] < out.worst_margin) {
      out.worst_margin = margins[i];
      out.worst_point = points[i];
    }
    if (!passed[i]) out.pass = false;
  }
  return out;
}

CheckOutcome reduce_margins(const std::vector<double>& margins,
                            const std::vector<Vector>& points,
                            std::size_t evaluations) {
  std::vector<char> passed(margins.size());
  for (std::size_t i = 0; i < margins.size(); ++i) {
    passed[i] = margins[i] >= -kMarginTolerance;
  }
  return reduce_margins(margins, points, passed, evaluations);
}

void reject_unknown_keys(const nlohmann::json& spec,
                         std::initializer_list<const char*> allowed) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : spec.items()) {
    if (!ok.count(key)) {
      throw ParseError("coefficient family: unknown key '" + key + "'");
    }
  }
}

}  // namespace

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

bool CoefficientDomain::contains(const Vector& x) const {
  const double r = (x - center).norm();
  return r > inner_radius && r < outer_radius;
}

nlohmann::json CoefficientDomain::to_json() const {
  return {{"center", vector_to_json(center)},
          {"inner_radius", inner_radius},
          {"outer_radius", outer_radius}};
}

nlohmann::json CheckOutcome::to_json() const {
  nlohmann::json j = {{"pass", pass},
                      {"worst_margin", worst_margin},
                      {"evaluations", evaluations}};
  if (worst_point.size() > 0) j["worst_point"] = vector_to_json(worst_point);
  return j;
}

nlohmann::json GrowthCertificate::to_json() const {
  return {{"weight", weight.to_json()},
          {"ball", {{"center", vector_to_json(ball.center)},
                    {"radius", ball.radius}}},
          {"pass", pass()},
          {"n_samples", n_samples},
          {"checks",
           {{"ellipticity", ellipticity.to_json()},
            {"a_upper", a_upper.to_json()},
            {"b_bound", b_bound.to_json()},
            {"c_bound", c_bound.to_json()}}}};
}

nlohmann::json EllipticityReport::to_json() const {
  return {{"pass", pass()}, {"lower", lower.to_json()}, {"upper", upper.to_json()}};
}

OperatorCoefficients::OperatorCoefficients(int dimension, MatrixFn a,
                                           VectorFn b, ScalarFn c,
                                           CoefficientDomain domain,
                                           std::string name)
    : dimension_(dimension),
      a_(std::move(a)),
      b_(std::move(b)),
      c_(std::move(c)),
      domain_(std::move(domain)),
      name_(std::move(name)) {
  if (dimension < 1) throw PreconditionError("operator dimension must be >= 1");
  if (!a_ || !b_ || !c_) {
    throw PreconditionError("operator coefficients must all be provided");
  }
}

Matrix OperatorCoefficients::a(const Vector& x) const {
  Matrix m = a_(x);
  if (m.rows() != dimension_ || m.cols() != dimension_) {
    throw DomainError("coefficient matrix has wrong shape");
  }
  const double asymmetry = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw DomainError("coefficient matrix is not symmetric");
  }
  return 0.5 * (m + m.transpose());
}

double OperatorCoefficients::apply(const Vector& x, double value,
                                   const Vector& gradient,
                                   const Matrix& hessian) const {
  return a(x).cwiseProduct(hessian).sum() + b(x).dot(gradient) + c(x) * value;
}

std::vector<Vector> graded_ball_samples(const Ball& ball, std::size_t count,
                                        double d_min, std::uint64_t seed) {
  if (!(ball.radius > 0.0) || !(d_min > 0.0) || d_min >= ball.radius) {
    throw PreconditionError("graded samples need 0 < d_min < radius");
  }
  const int n = ball.dimension();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double log_lo = std::log(d_min);
  const double log_hi = std::log(ball.radius);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Vector dir = random_unit(n, rng);
    double d;
    if (i % 2 == 0) {
      d = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
    } else {
      d = ball.radius * (1.0 - std::pow(unit(rng), 1.0 / n));
    }
    d = std::clamp(d, d_min, ball.radius * (1.0 - 1e-12));
    out.push_back(ball.center + (ball.radius - d) * dir);
  }
  return out;
}

std::vector<Vector> probe_directions(int n, std::size_t random_count,
                                     std::uint64_t seed) {
  std::vector<Vector> out;
  for (int i = 0; i < n; ++i) out.push_back(Vector::Unit(n, i));
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = 0; i < random_count; ++i) out.push_back(random_unit(n, rng));
  return out;
}

EllipticityReport ellipticity_check(const OperatorCoefficients& coeffs,
                                    const RadialWeight& weight, const Ball& ball,
                                    const std::vector<Vector>& samples,
                                    const std::vector<Vector>& directions) {
  std::vector<double> lower(samples.size());
  std::vector<double> upper(samples.size());
  parallel_for(samples.size(), [&](std::size_t s) {
    const Vector& x = samples[s];
    const double lambda = weight.eval(ball.boundary_distance(x));
    const Matrix a = coeffs.a(x);
    double lo = kInf;
    double up = kInf;
    for (const Vector& y : directions) {
      const double norm2 = y.squaredNorm();
      const double form = y.dot(a * y);
      lo = std::min(lo, form - norm2);
      up = std::min(up, lambda * norm2 - form);
    }
    lower[s] = lo;
    upper[s] = up;
  });
  const std::size_t evaluations = samples.size() * directions.size();
  return {reduce_margins(lower, samples, evaluations),
          reduce_margins(upper, samples, evaluations)};
}

GrowthCertificate growth_check(const OperatorCoefficients& coeffs,
                               const RadialWeight& weight, const Ball& ball,
                               const GrowthSampling& sampling) {
  if (coeffs.dimension() != ball.dimension()) {
    throw PreconditionError("growth_check: dimension mismatch");
  }
  const auto samples =
      graded_ball_samples(ball, sampling.samples, sampling.d_min, sampling.seed);
  const auto directions = probe_directions(coeffs.dimension(),
                                           sampling.random_directions,
                                           sampling.seed);
  const EllipticityReport ell =
      ellipticity_check(coeffs, weight, ball, samples, directions);

  std::vector<double> b_margin(samples.size());
  std::vector<double> c_margin(samples.size());
  parallel_for(samples.size(), [&](std::size_t s) {
    const Vector& x = samples[s];
    const double d = ball.boundary_distance(x);
    const double lambda = weight.eval(d);
    const Vector b = coeffs.b(x);
    b_margin[s] = lambda - b.cwiseAbs().maxCoeff();
    c_margin[s] = coeffs.c(x) + lambda / d;
  });
  GrowthCertificate cert{weight, ball, ell.lower, ell.upper,
                         reduce_margins(b_margin, samples, samples.size()),
                         reduce_margins(c_margin, samples, samples.size()),
                         samples.size()};
  return cert;
}

OperatorCoefficients adversarial_coefficients(int n, const Ball& ball,
                                              const RadialWeight& weight,
                                              double bump) {
  if (ball.dimension() != n) {
    throw PreconditionError("adversarial_coefficients: dimension mismatch");
  }
  if (!(bump >= 0.0 && bump <= 1.0)) {
    throw PreconditionError("adversarial_coefficients: bump must lie in [0, 1]");
  }
  if (weight.d_max() < ball.radius) {
    throw PreconditionError("adversarial_coefficients: weight must cover (0, R]");
  }
  if (weight.eval(ball.radius) < 1.0) {
    throw PreconditionError(
        "adversarial_coefficients: ellipticity needs weight >= 1 on (0, R]");
  }
  auto a = [=](const Vector& x) -> Matrix {
    Matrix m = Matrix::Identity(n, n);
    if (bump > 0.0) {
      const Vector offset = x - ball.center;
      const double r = offset.norm();
      if (r > 0.0) {
        const Vector e = offset / r;
        const double lambda = weight.eval(ball.boundary_distance(x));
        m += bump * (lambda - 1.0) * e * e.transpose();
      }
    }
    return m;
  };
  auto b = [=](const Vector& x) -> Vector {
    const double lambda = weight.eval(ball.boundary_distance(x));
    Vector out(n);
    for (int i = 0; i < n; ++i) out(i) = lambda * sgn(x(i) - ball.center(i));
    return out;
  };
  auto c = [=](const Vector& x) {
    const double d = ball.boundary_distance(x);
    return -weight.eval(d) / d;
  };
  OperatorCoefficients coeffs(n, a, b, c, CoefficientDomain::ball(ball),
                              "adversarial");
  coeffs.attach_certificate(growth_check(coeffs, weight, ball));
  return coeffs;
}

OperatorCoefficients make_coefficient_family(const nlohmann::json& spec, int n,
                                             const Ball& ball,
                                             const RadialWeight& weight) {
  if (!spec.is_object() || !spec.contains("family")) {
    throw ParseError("coefficient family spec must be an object with 'family'");
  }
  const std::string family = spec.at("family").get<std::string>();
  const auto domain = CoefficientDomain::ball(ball);
  auto lambda_at = [=](const Vector& x) {
    return weight.eval(ball.boundary_distance(x));
  };
  auto zero_b = [n](const Vector&) { return Vector::Zero(n).eval(); };
  auto identity = [n](const Vector&) { return Matrix::Identity(n, n).eval(); };

  if (family == "laplacian") {
    reject_unknown_keys(spec, {"family"});
    return OperatorCoefficients(n, identity, zero_b,
                                [](const Vector&) { return 0.0; }, domain,
                                "laplacian");
  }
  if (family == "adversarial") {
    reject_unknown_keys(spec, {"family", "bump"});
    return adversarial_coefficients(n, ball, weight, spec.value("bump", 0.0));
  }
  if (family == "scaled_identity") {
    reject_unknown_keys(spec, {"family"});
    return OperatorCoefficients(
        n, [=](const Vector& x) { return (lambda_at(x) * Matrix::Identity(n, n)).eval(); },
        zero_b, [](const Vector&) { return 0.0; }, domain, "scaled_identity");
  }
  if (family == "singular_c") {
    reject_unknown_keys(spec, {"family", "power", "scale"});
    const double power = spec.value("power", 1.0);
    const double scale = spec.value("scale", 1.0);
    return OperatorCoefficients(
        n, identity, zero_b,
        [=](const Vector& x) {
          const double d = ball.boundary_distance(x);
          return -scale * weight.eval(d) / std::pow(d, power);
        },
        domain, "singular_c");
  }
  if (family == "anisotropic") {
    reject_unknown_keys(spec, {"family"});
    return OperatorCoefficients(
        n,
        [=](const Vector& x) {
          Matrix m = Matrix::Identity(n, n);
          if (n >= 2) m(1, 1) = 1.0 + lambda_at(x);
          return m;
        },
        zero_b, [](const Vector&) { return 0.0; }, domain, "anisotropic");
  }
  throw ParseError("unknown coefficient family '" + family + "'");
}

// ---------------------------------------------------------------------------

nlohmann::json QuasilinearBounds::to_json() const {
  return {{"M_z", M_z}, {"M_eta", M_eta}, {"a_z", a_z},
          {"a_eta", a_eta}, {"b_z", b_z}, {"b_eta", b_eta}};
}

Matrix QuasilinearData::principal_at(const Vector& x, double z,
                                     const Vector& eta) const {
  if (form == Form::kNonDivergence) {
    if (!principal) throw PreconditionError("quasilinear data lacks A_ij");
    return principal(x, z, eta);
  }
  if (!flux_eta) throw PreconditionError("quasilinear data lacks dA/deta");
  return flux_eta(x, z, eta);
}

double apply_quasilinear(const QuasilinearData& q, const AnalyticField& u,
                         const Vector& x) {
  const double z = u.value(x);
  const Vector eta = u.gradient(x);
  const Matrix hess = u.hessian(x);
  const double lower = q.lower_order ? q.lower_order(x, z, eta) : 0.0;
  if (q.form == QuasilinearData::Form::kNonDivergence) {
    return q.principal_at(x, z, eta).cwiseProduct(hess).sum() + lower;
  }
  double div = q.flux_x_divergence ? q.flux_x_divergence(x, z, eta) : 0.0;
  if (q.flux_z) div += q.flux_z(x, z, eta).dot(eta);
  div += q.flux_eta(x, z, eta).cwiseProduct(hess.transpose()).sum();
  return div + lower;
}

double ReducedOperator::c_lower_bound(const Vector& x) const {
  const double d = ball.boundary_distance(x);
  const int n = ball.dimension();
  return -(weight.eval(d) / d) * (n * n * hessian_sup + 1.0);
}

ReducedOperator quasilinear_reduce(const QuasilinearData& q,
                                   const AnalyticField& u,
                                   const AnalyticField& v,
                                   const RadialWeight& weight, const Ball& ball,
                                   const std::vector<Vector>& samples) {
  if (!u.has_hessian() || !v.has_hessian()) {
    throw DerivativeUnavailableError(
        "quasilinear_reduce: u and v need second derivatives");
  }
  const int n = q.dimension;
  auto a = [=](const Vector& x) { return q.principal_at(x, u.value(x), u.gradient(x)); };
  auto b = [=](const Vector& x) -> Vector {
    const double lambda = weight.eval(ball.boundary_distance(x));
    const Vector dw = u.gradient(x) - v.gradient(x);
    const Matrix hv = v.hessian(x);
    Vector out(n);
    for (int i = 0; i < n; ++i) {
      double sum = sgn(dw(i));
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) sum += hv(k, l) * sgn(hv(k, l) * dw(i));
      }
      out(i) = lambda * sum;
    }
    return out;
  };
  auto c = [=](const Vector& x) {
    const double d = ball.boundary_distance(x);
    const double lambda = weight.eval(d);
    const double uu = u.value(x);
    const double vv = v.value(x);
    const double w = uu - vv;
    const Matrix hv = v.hessian(x);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) sum += hv(k, l) * sgn(hv(k, l) * w);
    }
    double quotient = -lambda / d;
    if (std::abs(w) >= kQuotientGuard && q.lower_order) {
      const Vector dv = v.gradient(x);
      quotient = (q.lower_order(x, uu, dv) - q.lower_order(x, vv, dv)) / w;
    } else if (std::abs(w) >= kQuotientGuard) {
      quotient = 0.0;
    }
    return lambda / d * sum + quotient;
  };

  ReducedOperator out{OperatorCoefficients(n, a, b, c,
                                           CoefficientDomain::ball(ball),
                                           "quasilinear_reduced"),
                      0.0, 1.0, weight, ball};
  double ratio = 0.0;
  for (const Vector& x : samples) {
    out.hessian_sup = std::max(out.hessian_sup, v.hessian(x).cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(out.coefficients.a(x),
                                                    Eigen::EigenvaluesOnly);
    ratio = std::max(ratio, eig.eigenvalues().maxCoeff() /
                                weight.eval(ball.boundary_distance(x)));
  }
  out.lambda_factor = std::max(1.0 + n * n * out.hessian_sup, ratio);
  return out;
}

nlohmann::json LipschitzReport::to_json() const {
  return {{"pass", pass()},
          {"principal", principal.to_json()},
          {"lower_order", lower_order.to_json()}};
}

LipschitzReport lower_lipschitz_check(const QuasilinearData& q,
                                      const RadialWeight& weight,
                                      const Ball& ball, const LipschitzBox& box,
                                      const LipschitzSampling& sampling) {
  const int n = q.dimension;
  const auto points = graded_ball_samples(ball, sampling.samples,
                                          sampling.d_min, sampling.seed);
  struct Draw {
    double z1, z2;
    Vector eta1, eta2;
  };
  std::vector<Draw> draws;
  draws.reserve(points.size());
  std::mt19937_64 rng(sampling.seed + 0x51ed27);
  std::uniform_real_distribution<double> zdist(-box.M_z, box.M_z);
  std::uniform_real_distribution<double> edist(-box.M_eta, box.M_eta);
  for (std::size_t s = 0; s < points.size(); ++s) {
    Draw d;
    d.z1 = zdist(rng);
    d.z2 = zdist(rng);
    if (d.z1 < d.z2) std::swap(d.z1, d.z2);
    d.eta1 = Vector(n);
    d.eta2 = Vector(n);
    for (int i = 0; i < n; ++i) d.eta1(i) = edist(rng);
    const bool same_gradient = s % 2 == 0;
    for (int i = 0; i < n; ++i) d.eta2(i) = same_gradient ? d.eta1(i) : edist(rng);
    draws.push_back(std::move(d));
  }

  std::vector<double> a_margin(points.size(), kInf);
  std::vector<double> b_margin(points.size(), kInf);
  std::vector<char> a_pass(points.size(), 1);
  std::vector<char> b_pass(points.size(), 1);
  parallel_for(points.size(), [&](std::size_t s) {
    const Vector& x = points[s];
    const Draw& dr = draws[s];
    const double d = ball.boundary_distance(x);
    const double lambda = weight.eval(d);
    const double dz = dr.z1 - dr.z2;
    const double deta = (dr.eta1 - dr.eta2).cwiseAbs().sum();
    const double allowance_abs = lambda * (dz / d + deta);
    const Matrix a1 = q.principal_at(x, dr.z1, dr.eta1);
    const Matrix a2 = q.principal_at(x, dr.z2, dr.eta2);
    const double jump = (a1 - a2).cwiseAbs().maxCoeff();
    a_margin[s] = allowance_abs - jump;
    a_pass[s] = a_margin[s] >= -kMarginTolerance * (1.0 + allowance_abs + jump);
    if (q.lower_order) {
      const double diff = q.lower_order(x, dr.z1, dr.eta1) -
                          q.lower_order(x, dr.z2, dr.eta2);
      b_margin[s] = diff + allowance_abs;
      b_pass[s] = b_margin[s] >=
                  -kMarginTolerance * (1.0 + std::abs(diff) + allowance_abs);
    }
  });
  return {reduce_margins(a_margin, points, a_pass, points.size()),
          reduce_margins(b_margin, points, b_pass, points.size())};
}

}  // namespace bpplab
