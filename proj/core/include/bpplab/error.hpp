#pragma once

#include <stdexcept>
#include <string>

namespace bpplab {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the domain of a function (e.g. a radius outside
// the support of a weight, a point outside an annulus).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A documented precondition on the inputs does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Graded quadrature did not settle within the level budget, which for a
// non-increasing positive integrand means the data are not integrable.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class DerivativeUnavailableError : public Error {
 public:
  using Error::Error;
};

class StencilError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double final_residual)
      : Error(what), final_residual_(final_residual) {}
  double final_residual() const noexcept { return final_residual_; }

 private:
  double final_residual_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace bpplab
