#pragma once

#include "bpplab/operator.hpp"
#include "bpplab/types.hpp"

#include <json.hpp>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace bpplab {

// Tensor grids: an interval, a rectangle, or a polar annulus around the
// origin. Axis spacing may be graded geometrically toward the upper end
// (ratio q in (0, 1]; q = 1 is uniform), which for the annulus is the outer
// circle where singular coefficients live.
class Grid {
 public:
  enum class Kind { kInterval, kRectangle, kPolarAnnulus };

  static Grid interval(double a, double b, int cells, double q = 1.0);
  static Grid rectangle(Vector lower, Vector upper, int cells_x, int cells_y);
  static Grid polar_annulus(double r_inner, double r_outer, int radial_cells,
                            int angular_cells, double q = 0.9);

  Kind kind() const { return kind_; }
  int dimension() const { return kind_ == Kind::kInterval ? 1 : 2; }
  std::size_t size() const { return first_.size() * second_size(); }
  // Node coordinates along the first axis (x or r) and second axis (y or φ).
  const std::vector<double>& first_axis() const { return first_; }
  const std::vector<double>& second_axis() const { return second_; }

  std::size_t index(std::size_t i, std::size_t j = 0) const { return i + first_.size() * j; }
  std::size_t first_index(std::size_t node) const { return node % first_.size(); }
  std::size_t second_index(std::size_t node) const { return node / first_.size(); }

  // Cartesian coordinates of a node.
  Vector point(std::size_t node) const;
  bool is_boundary(std::size_t node) const;

  nlohmann::json to_json() const;
  static Grid from_json(const nlohmann::json& j);

 private:
  std::size_t second_size() const { return kind_ == Kind::kInterval ? 1 : second_.size(); }

  Kind kind_ = Kind::kInterval;
  std::vector<double> first_;
  std::vector<double> second_;  // for the annulus: angles 2πj/N, periodic
  double grading_ = 1.0;
};

// Node positions a = x_0 < ... < x_cells = b with spacing Δ_i = Δ_0 q^i.
std::vector<double> graded_axis(double a, double b, int cells, double q);

struct Field {
  std::shared_ptr<const Grid> grid;
  Vector values;

  static Field sample(std::shared_ptr<const Grid> grid,
                      const std::function<double(const Vector&)>& fn);
  // One row per node: coordinates then value.
  void write_csv(const std::string& path) const;
};

struct StencilEntry {
  std::size_t node;
  double weight;
};

// Discrete L at an interior node: three-point (possibly non-uniform)
// second and first differences, the symmetric four-point cross difference,
// and for the annulus the polar form
//   a_rr u_rr + a_φφ (u_r/r + u_φφ/r²) + 2 a_rφ (u_rφ/r - u_φ/r²)
//   + b_r u_r + b_φ u_φ / r + c u.
std::vector<StencilEntry> stencil(const OperatorCoefficients& coeffs,
                                  const Grid& grid, std::size_t node);

// L_h[u] at interior nodes; boundary entries are 0.
Field apply_operator(const OperatorCoefficients& coeffs, const Field& u);

struct SolveOptions {
  double residual_tolerance = 1e-8;
  double iterative_tolerance = 1e-10;
  int max_iterations = 5000;
};

struct SolveResult {
  Field field;
  std::string method;  // "sparse_lu" or "bicgstab"
  bool diagonally_dominant = false;
  double residual = 0.0;  // max |L_h u - rhs| relative to the row scale
  nlohmann::json to_json() const;
};

// Dirichlet problem L_h u = rhs inside, u = boundary_data on boundary nodes.
// Requires c <= 0 at interior nodes.
SolveResult solve_dirichlet(const OperatorCoefficients& coeffs,
                            std::shared_ptr<const Grid> grid,
                            const std::function<double(const Vector&)>& boundary_data,
                            const std::function<double(const Vector&)>& rhs = {},
                            const SolveOptions& options = {});

struct CsmpReport {
  double interior_max = 0.0;
  double boundary_max = 0.0;
  double margin = 0.0;  // boundary_max - interior_max
  Vector argmax;
  bool argmax_on_boundary = false;
  bool constant = false;
  bool strict = false;
  nlohmann::json to_json() const;
};

CsmpReport csmp_check(const Field& field, double tolerance = 0.0);

struct HopfReport {
  std::vector<double> h;
  std::vector<double> quotients;
  std::vector<bool> interpolated;
  double extrapolated = 0.0;
  bool positive = false;
  bool converging = false;   // successive differences strictly decrease
  double fitted_order = 0.0;  // slope of log|Q_h| against log h
  bool boundary_max = false;  // u(x_b) is the largest nodal value
  nlohmann::json to_json() const;
};

// Interpolated value of the field at x (linear, bilinear, or bilinear in
// (r, φ)); sets *on_node when x is a grid node.
double interpolate(const Field& field, const Vector& x, bool* on_node = nullptr);

// Quotients (u(x_b) - u(x_b - h ν))/h and their Richardson extrapolation.
HopfReport hopf_quotient(const Field& field, const Vector& x_b, const Vector& nu,
                         const std::vector<double>& h_sequence,
                         double tolerance = 1e-8);

}  // namespace bpplab
