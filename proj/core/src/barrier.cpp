#include "bpplab/barrier.hpp"

#include "bpplab/error.hpp"
#include "bpplab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace bpplab {

double compute_k(int n, double R) {
  if (n < 1 || !(R > 0.0)) throw PreconditionError("compute_k: need n >= 1, R > 0");
  return 2.0 * n * (2.0 / R + 1.0) + 3.0;
}

double admissible_epsilon(int n, double R, const RadialWeight& weight,
                          double margin) {
  const double k = compute_k(n, R);
  const double target = (1.0 - margin) / k;
  // Keep strictly below min{1, R/2} and inside the weight's support.
  double hi = std::min({1.0, R / 2.0, weight.d_max()}) * (1.0 - 1e-9);
  if (weight.integrate_first(hi) < target) return hi;
  // Bracket by halving, but not below widths that radii near R can still
  // resolve in double precision.
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * std::max(1.0, R);
  double lo = hi;
  while (weight.integrate_first(lo) >= target) {
    hi = lo;
    lo *= 0.5;
    if (lo < floor) {
      throw NotFoundError("admissible_epsilon: no admissible width above " +
                          std::to_string(floor) + " for " + weight.describe());
    }
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (weight.integrate_first(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

Barrier::Barrier(int n, double R, double eps, double m, RadialWeight weight)
    : n_(n), R_(R), eps_(eps), m_(m), k_(compute_k(n, R)),
      weight_(std::move(weight)) {
  if (!(eps > 0.0 && eps < std::min(1.0, R / 2.0))) {
    throw PreconditionError("barrier: need 0 < eps < min{1, R/2}");
  }
  if (!(m > 0.0)) throw PreconditionError("barrier: m must be positive");
  if (eps > weight_.d_max()) {
    throw PreconditionError("barrier: weight support shorter than eps");
  }
  if (!(weight_.integrate_first(eps) < 1.0 / k_)) {
    throw PreconditionError("barrier: integral of the weight over (0, eps) "
                            "must be below 1/k");
  }
  f_at_eps_ = eps + k_ * weight_.integrate_second(eps);
  if (!(f_at_eps_ > eps && f_at_eps_ < 2.0 * eps)) {
    throw PreconditionError("barrier: f(eps) outside (eps, 2 eps)");
  }
}

Barrier Barrier::with_admissible_epsilon(int n, double R, double m,
                                         RadialWeight weight) {
  const double eps = admissible_epsilon(n, R, weight);
  return Barrier(n, R, eps, m, std::move(weight));
}

RadialProfile Barrier::f(double r) const {
  if (!(r >= 0.0 && r <= eps_)) throw DomainError("barrier f: r outside [0, eps]");
  if (r == 0.0) return {0.0, 1.0, std::numeric_limits<double>::quiet_NaN()};
  return {r + k_ * weight_.integrate_second(r),
          1.0 + k_ * weight_.integrate_first(r), k_ * weight_.eval(r)};
}

double Barrier::distance_to_outer(const Vector& x) const {
  if (x.size() != n_) throw DomainError("barrier: point has wrong dimension");
  const double slack = 1e-12 * std::max(1.0, R_);
  const double r = x.norm();
  if (r > R_ + slack || r < R_ - eps_ - slack) {
    throw DomainError("barrier: point outside the closed annulus");
  }
  return std::clamp(R_ - r, 0.0, eps_);
}

BarrierValue Barrier::eval(const Vector& x) const {
  const double d = distance_to_outer(x);
  const double scale = m_ / f_at_eps_;
  // Exact endpoint values rather than m·f(ε)/f(ε).
  if (d == eps_) return {m_, -f(d).first * scale * x / x.norm()};
  const RadialProfile p = f(d);
  return {p.value * scale, -p.first * scale * x / x.norm()};
}

double Barrier::radial_operator(const OperatorCoefficients& coeffs,
                                const Vector& x) const {
  const double r = x.norm();
  const double d = R_ - r;
  if (!(d > 0.0 && d < eps_)) {
    throw DomainError("radial_operator: point not in the open annulus");
  }
  const RadialProfile p = f(d);
  const Matrix a = coeffs.a(x);
  const Vector b = coeffs.b(x);
  const double xax = x.dot(a * x);
  return (p.second * r + p.first) / (r * r * r) * xax -
         p.first / r * a.trace() - p.first / r * b.dot(x) +
         coeffs.c(x) * p.value;
}

nlohmann::json Barrier::to_json() const {
  return {{"n", n_},
          {"R", R_},
          {"eps", eps_},
          {"m", m_},
          {"k", k_},
          {"weight", weight_.to_json()},
          {"f_eps", f_at_eps_},
          {"I1_eps", weight_.integrate_first(eps_)},
          {"normal_derivative", normal_derivative()}};
}

std::vector<Vector> annulus_samples(const Barrier& barrier, std::size_t count,
                                    std::uint64_t seed) {
  const int n = barrier.n();
  const double lo = kAnnulusGuard;
  const double hi = barrier.eps() - kAnnulusGuard;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vector dir(n);
    do {
      for (int j = 0; j < n; ++j) dir(j) = normal(rng);
    } while (dir.norm() < 1e-12);
    dir /= dir.norm();
    const double u = unit(rng);
    const double d = i % 2 == 0 ? lo * std::pow(hi / lo, u) : lo + (hi - lo) * u;
    out.push_back((barrier.R() - d) * dir);
  }
  return out;
}

nlohmann::json ResidualReport::to_json() const {
  return {{"min_residual", min_residual},
          {"argmin_point", vector_to_json(argmin_point)},
          {"pass", pass},
          {"n_samples", n_samples},
          {"certificate_missing", certificate_missing}};
}

ResidualReport residual_check(const Barrier& barrier,
                              const OperatorCoefficients& coeffs,
                              const std::vector<Vector>& samples,
                              double atol) {
  if (samples.empty()) throw PreconditionError("residual_check: no samples");
  std::vector<double> residual(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const Vector& x = samples[i];
    residual[i] = barrier.radial_operator(coeffs, x) -
                  barrier.weight().eval(barrier.R() - x.norm());
    // A non-finite residual is never evidence of success.
    if (std::isnan(residual[i])) residual[i] = -std::numeric_limits<double>::infinity();
  });
  ResidualReport report;
  report.n_samples = samples.size();
  report.min_residual = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (residual[i] < report.min_residual) {
      report.min_residual = residual[i];
      report.argmin_point = samples[i];
    }
  }
  report.pass = report.min_residual >= -atol;
  report.certificate_missing = !coeffs.certificate().has_value();
  return report;
}

}  // namespace bpplab
