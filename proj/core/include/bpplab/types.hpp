#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace bpplab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Open ball B_radius(center).
struct Ball {
  Vector center;
  double radius = 0.0;

  int dimension() const { return static_cast<int>(center.size()); }

  // d({x}, ∂B) for x inside the ball; negative outside.
  double boundary_distance(const Vector& x) const {
    return radius - (x - center).norm();
  }
};

// Convenience for building small vectors in tests and configs.
Vector make_vector(std::initializer_list<double> values);

}  // namespace bpplab
