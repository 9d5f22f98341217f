#include "bpplab/fields.hpp"

#include "bpplab/error.hpp"

namespace bpplab {

AnalyticField::AnalyticField(int dimension, ValueFn value, GradientFn gradient,
                             HessianFn hessian)
    : dimension_(dimension),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)) {
  if (dimension < 1) throw PreconditionError("field dimension must be >= 1");
  if (!value_ || !gradient_) {
    throw DerivativeUnavailableError("field needs a value and a gradient");
  }
}

Matrix AnalyticField::hessian(const Vector& x) const {
  if (!hessian_) {
    throw DerivativeUnavailableError("field has no second derivatives");
  }
  return hessian_(x);
}

AnalyticField AnalyticField::zero(int dimension) {
  return AnalyticField(
      dimension, [](const Vector&) { return 0.0; },
      [dimension](const Vector&) { return Vector::Zero(dimension).eval(); },
      [dimension](const Vector&) {
        return Matrix::Zero(dimension, dimension).eval();
      });
}

Matrix finite_difference_hessian(const AnalyticField& field, const Vector& x,
                                 double h, int order) {
  if (order != 2 && order != 4) {
    throw PreconditionError("finite_difference_hessian: order must be 2 or 4");
  }
  const int n = field.dimension();
  Matrix out(n, n);
  const double f0 = field.value(x);
  auto pure = [&](const Vector& e) {
    return (field.value(x + e) - 2.0 * f0 + field.value(x - e)) / e.squaredNorm();
  };
  auto mixed = [&](const Vector& e, const Vector& f) {
    return (field.value(x + e + f) - field.value(x + e - f) - field.value(x - e + f) +
            field.value(x - e - f)) /
           (4.0 * e.norm() * f.norm());
  };
  for (int i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    e(i) = h;
    // Fourth order: Richardson combination of steps h and 2h.
    out(i, i) = order == 2 ? pure(e) : (4.0 * pure(e) - pure(2.0 * e)) / 3.0;
    for (int j = 0; j < i; ++j) {
      Vector f = Vector::Zero(n);
      f(j) = h;
      const double m =
          order == 2 ? mixed(e, f) : (4.0 * mixed(e, f) - mixed(2.0 * e, 2.0 * f)) / 3.0;
      out(i, j) = m;
      out(j, i) = m;
    }
  }
  return out;
}

}  // namespace bpplab
