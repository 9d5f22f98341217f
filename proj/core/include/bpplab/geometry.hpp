#pragma once

#include "bpplab/types.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bpplab {

// Ω: an open axis-aligned box or an open ball.
class DomainShape {
 public:
  static DomainShape cube(int n);  // (-1, 1)^n
  static DomainShape box(Vector lower, Vector upper);
  static DomainShape ball(Vector center, double radius);

  int dimension() const { return static_cast<int>(lower_.size()); }
  bool is_ball() const { return is_ball_; }
  // Signed distance to ∂Ω, positive inside.
  double boundary_distance(const Vector& x) const;
  bool contains(const Vector& x) const { return boundary_distance(x) > 0.0; }
  // Bounding box.
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  nlohmann::json to_json() const;

 private:
  bool is_ball_ = false;
  Vector lower_;
  Vector upper_;
};

// The singular set S. Every kind reports an exact (or exact-infimum)
// distance and, when S meets an open ball, a point of S inside it.
class SingularSet {
 public:
  enum class Kind { kEmpty, kPoints, kPolyline, kAxisCross, kHalfCross, kLineFamily };

  static SingularSet empty(int n);
  static SingularSet points(std::vector<Vector> pts);
  // Piecewise-linear curve through the given vertices.
  static SingularSet polyline(std::vector<Vector> vertices);
  // Samples a C² curve φ: [t0, t1] -> R^n at `count` parameter values.
  // The largest second difference |φ(t+δ) - 2φ(t) + φ(t-δ)| is recorded.
  static SingularSet curve(const std::function<Vector(double)>& phi, double t0,
                           double t1, std::size_t count);
  // {x1 = 0 or x2 = 0} ∩ Ω.
  static SingularSet axis_cross();
  // {x1 = 0} ∪ {x2 = 0, x1 >= 0}, intersected with Ω.
  static SingularSet half_cross();
  // Lines x1 = 1/(2k), k = 1, 2, ...
  static SingularSet line_family();

  Kind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  std::string kind_name() const;

  // inf_{s ∈ S} |x - s|; +inf for the empty set.
  double distance(const Vector& x) const;
  // Some s ∈ S with |s - center| < radius, if one exists.
  std::optional<Vector> witness_in_ball(const Vector& center, double radius) const;

  double max_second_difference() const { return second_difference_; }
  nlohmann::json to_json() const;

 private:
  SingularSet(Kind kind, int n) : kind_(kind), dimension_(n) {}

  // Nearest point of S to x among finitely represented parts.
  Vector nearest(const Vector& x) const;

  Kind kind_;
  int dimension_;
  std::vector<Vector> points_;  // points or polyline vertices
  double second_difference_ = 0.0;
};

// T: finitely many points and closed boxes, implicitly intersected with Ω.
struct TestSet {
  std::vector<Vector> points;
  struct Box {
    Vector lower;
    Vector upper;
  };
  std::vector<Box> boxes;

  bool empty() const { return points.empty() && boxes.empty(); }
  double distance(const Vector& x) const;
  nlohmann::json to_json() const;
};

struct SingularSetScene {
  DomainShape omega;
  SingularSet singular;
  TestSet T;

  // Rejects empty T, T outside Ω and T covering Ω.
  void validate() const;

  static SingularSetScene from_json(const nlohmann::json& j);
  // "finite_points", "axis_cross", "half_cross", "line_family", "empty".
  static SingularSetScene preset(const std::string& name);
  nlohmann::json to_json() const;
};

// Grid centres i·h (plus Ω's centre for balls) with |i·h| inside the
// bounding box of Ω.
std::vector<Vector> grid_centers(const DomainShape& omega, double h);

struct OutwardBallResult {
  bool found = false;
  double h = 0.0;
  Vector center;
  double radius = 0.0;
  double distance_to_T = 0.0;
  double distance_to_S = 0.0;
  double distance_to_boundary = 0.0;
  std::size_t centers_tested = 0;
  nlohmann::json to_json() const;  // "not_found_at_resolution" when !found
};

inline constexpr double kTouchTolerance = 1e-12;

// Grid search for B_R(x0) ⊂ Ω ∖ (T ∪ S) with R = dist(x0, T). Among
// accepted centres the largest R wins; ties go to the lexicographically
// smallest centre.
OutwardBallResult outward_ball_search(const SingularSetScene& scene, double h);

struct FalsificationReport {
  double h = 0.0;
  std::size_t candidates = 0;
  std::size_t witnessed = 0;
  bool falsified = false;  // every candidate meets S and there is at least one
  std::optional<Vector> unwitnessed_center;
  struct Example {
    Vector center;
    double radius;
    Vector witness;
  };
  std::vector<Example> examples;  // first few witnessed candidates
  nlohmann::json to_json() const;
};

// Candidates: grid balls B_R(x0) ⊂ Ω with x0 ∉ T ∪ S and R = dist(x0, T).
FalsificationReport falsify_outward_ball(const SingularSetScene& scene, double h);

struct PorosityReport {
  std::vector<double> scales;
  std::vector<double> ratios;  // 2γ/r with γ the largest hole radius found
  double tolerance = 0.05;
  bool pass = false;
  nlohmann::json to_json() const;
};

// For each scale r, the largest ρ with B_ρ(y) ⊂ B_r(s) ∖ S over a grid of
// spacing r/100. PASS iff every 2ρ/r >= 1 - tolerance.
PorosityReport porosity_check(const SingularSetScene& scene, const Vector& s,
                              const std::vector<double>& scales,
                              double tolerance = 0.05);

// κ(θ) = (1 + sinθ/3) / (1 + 2 sinθ/3)
double cone_kappa(double theta);

struct ConeChain {
  Vector apex;
  Vector axis;
  double theta = 0.0;
  double r0 = 0.0;
  double kappa = 0.0;
  std::vector<Vector> centers;
  std::vector<double> radii;
  // 2r_{k+1}/3 - (|y_k - y_{k+1}| + r_k/3); zero analytically.
  std::vector<double> nesting_margins;
  nlohmann::json to_json() const;
};

// y_k = apex + (r0/sinθ) κ^k axis, r_k = r0 κ^k, so each ball is tangent to
// the cone of half-angle θ and B_{r_k/3}(y_k) ⊂ B_{2r_{k+1}/3}(y_{k+1}).
// θ ∈ (0, π/2]; count >= 2. Throws if a nesting margin drops below -1e-12.
ConeChain cone_chain(const Vector& apex, const Vector& axis, double theta,
                     double r0, int count);

double unit_ball_volume(int n);

struct OrderCertificate {
  double kappa = 0.0;
  double C = 0.0;
  int n = 0;
  double L = 0.0;
  int m_star = 0;
  std::optional<double> fitted_slope;
  bool inconclusive = false;  // the sampled decay already exceeds m*
  nlohmann::json to_json() const;
};

// L = ω_n / (C 3^n); m* is the smallest integer with κ^m < L.
OrderCertificate order_certificate(
    double kappa, double C, int n,
    const std::vector<std::pair<double, double>>& samples = {});

// Least-squares slope of log(value) against log(distance).
double loglog_slope(const std::vector<double>& distances,
                    const std::vector<double>& values);

}  // namespace bpplab
