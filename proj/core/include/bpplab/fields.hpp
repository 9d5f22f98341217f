#pragma once

#include "bpplab/types.hpp"

#include <functional>

namespace bpplab {

// A scalar field on a subset of R^n with closed-form derivatives. The
// Hessian is optional; asking for it when absent raises
// DerivativeUnavailableError.
class AnalyticField {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using HessianFn = std::function<Matrix(const Vector&)>;

  AnalyticField(int dimension, ValueFn value, GradientFn gradient,
                HessianFn hessian = {});

  int dimension() const { return dimension_; }
  bool has_hessian() const { return static_cast<bool>(hessian_); }

  double value(const Vector& x) const { return value_(x); }
  Vector gradient(const Vector& x) const { return gradient_(x); }
  Matrix hessian(const Vector& x) const;

  static AnalyticField zero(int dimension);

 private:
  int dimension_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
};

// Central second differences of f along e_i, e_j with step h; order 4
// combines steps h and 2h. Used to cross-check closed-form Hessians.
Matrix finite_difference_hessian(const AnalyticField& field, const Vector& x,
                                 double h, int order = 2);

}  // namespace bpplab
