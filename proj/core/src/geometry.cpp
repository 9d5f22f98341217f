#include "bpplab/geometry.hpp"

#include "bpplab/error.hpp"
#include "bpplab/operator.hpp"
#include "bpplab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace bpplab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kReportedExamples = 5;

double segment_distance(const Vector& x, const Vector& a, const Vector& b,
                        Vector* nearest = nullptr) {
  const Vector ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  const Vector p = a + t * ab;
  if (nearest) *nearest = p;
  return (x - p).norm();
}

void require_plane(const Vector& x, const char* who) {
  if (x.size() != 2) {
    throw DomainError(std::string(who) + ": set is defined in the plane only");
  }
}

Vector json_vector(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty()) {
    throw ParseError(std::string("scene: '") + what + "' must be a numeric array");
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw ParseError(std::string("scene: '") + what + "' must be numeric");
    }
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

std::vector<Vector> json_points(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) {
    throw ParseError(std::string("scene: '") + what + "' must be an array");
  }
  std::vector<Vector> out;
  for (const auto& p : j) out.push_back(json_vector(p, what));
  return out;
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys,
                    const char* where) {
  if (!j.is_object()) throw ParseError(std::string("scene: '") + where + "' must be an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) {
      throw ParseError(std::string("scene: unknown key '") + key + "' in " + where);
    }
  }
}

// Calls fn(index_vector) for every point of the n-dimensional integer box
// [-m, m]^n in lexicographic order.
template <typename Fn>
void for_each_offset(int n, int m, Fn&& fn) {
  std::vector<int> idx(n, -m);
  while (true) {
    fn(idx);
    int d = n - 1;
    while (d >= 0 && idx[d] == m) idx[d--] = -m;
    if (d < 0) return;
    ++idx[d];
  }
}

}  // namespace

// ---------------------------------------------------------------------------

DomainShape DomainShape::cube(int n) {
  return box(Vector::Constant(n, -1.0), Vector::Constant(n, 1.0));
}

DomainShape DomainShape::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() < 1 ||
      !(lower.array() < upper.array()).all()) {
    throw PreconditionError("domain box needs lower < upper componentwise");
  }
  DomainShape d;
  d.lower_ = std::move(lower);
  d.upper_ = std::move(upper);
  return d;
}

DomainShape DomainShape::ball(Vector center, double radius) {
  if (!(radius > 0.0) || center.size() < 1) {
    throw PreconditionError("domain ball needs a positive radius");
  }
  DomainShape d;
  d.is_ball_ = true;
  d.lower_ = center.array() - radius;
  d.upper_ = center.array() + radius;
  return d;
}

double DomainShape::boundary_distance(const Vector& x) const {
  if (is_ball_) {
    const Vector c = 0.5 * (lower_ + upper_);
    return 0.5 * (upper_(0) - lower_(0)) - (x - c).norm();
  }
  return std::min((x - lower_).minCoeff(), (upper_ - x).minCoeff());
}

nlohmann::json DomainShape::to_json() const {
  if (is_ball_) {
    return {{"kind", "ball"},
            {"center", vector_to_json(0.5 * (lower_ + upper_))},
            {"radius", 0.5 * (upper_(0) - lower_(0))}};
  }
  return {{"kind", "box"}, {"lower", vector_to_json(lower_)},
          {"upper", vector_to_json(upper_)}};
}

// ---------------------------------------------------------------------------

SingularSet SingularSet::empty(int n) { return SingularSet(Kind::kEmpty, n); }

SingularSet SingularSet::points(std::vector<Vector> pts) {
  if (pts.empty()) throw PreconditionError("point set must be nonempty");
  SingularSet s(Kind::kPoints, static_cast<int>(pts.front().size()));
  for (const auto& p : pts) {
    if (p.size() != s.dimension_) throw PreconditionError("mixed point dimensions");
  }
  s.points_ = std::move(pts);
  return s;
}

SingularSet SingularSet::polyline(std::vector<Vector> vertices) {
  if (vertices.size() < 2) throw PreconditionError("polyline needs two vertices");
  SingularSet s(Kind::kPolyline, static_cast<int>(vertices.front().size()));
  for (const auto& p : vertices) {
    if (p.size() != s.dimension_) throw PreconditionError("mixed vertex dimensions");
  }
  s.points_ = std::move(vertices);
  return s;
}

SingularSet SingularSet::curve(const std::function<Vector(double)>& phi,
                               double t0, double t1, std::size_t count) {
  if (count < 3 || !(t1 > t0)) throw PreconditionError("curve needs count >= 3, t1 > t0");
  std::vector<Vector> vertices;
  for (std::size_t i = 0; i < count; ++i) {
    vertices.push_back(phi(t0 + (t1 - t0) * static_cast<double>(i) / (count - 1)));
  }
  SingularSet s = polyline(vertices);
  for (std::size_t i = 1; i + 1 < count; ++i) {
    s.second_difference_ = std::max(
        s.second_difference_,
        (vertices[i + 1] - 2.0 * vertices[i] + vertices[i - 1]).norm());
  }
  return s;
}

SingularSet SingularSet::axis_cross() { return SingularSet(Kind::kAxisCross, 2); }
SingularSet SingularSet::half_cross() { return SingularSet(Kind::kHalfCross, 2); }
SingularSet SingularSet::line_family() { return SingularSet(Kind::kLineFamily, 2); }

std::string SingularSet::kind_name() const {
  switch (kind_) {
    case Kind::kEmpty: return "empty";
    case Kind::kPoints: return "finite_points";
    case Kind::kPolyline: return "c2_curve";
    case Kind::kAxisCross: return "axis_cross";
    case Kind::kHalfCross: return "half_cross";
    case Kind::kLineFamily: return "line_family";
  }
  return "unknown";
}

Vector SingularSet::nearest(const Vector& x) const {
  switch (kind_) {
    case Kind::kPoints: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < points_.size(); ++i) {
        if ((x - points_[i]).norm() < (x - points_[best]).norm()) best = i;
      }
      return points_[best];
    }
    case Kind::kPolyline: {
      Vector best, p;
      double dist = kInf;
      for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        const double d = segment_distance(x, points_[i], points_[i + 1], &p);
        if (d < dist) {
          dist = d;
          best = p;
        }
      }
      return best;
    }
    case Kind::kAxisCross:
      return std::abs(x(0)) <= std::abs(x(1)) ? make_vector({0.0, x(1)})
                                               : make_vector({x(0), 0.0});
    case Kind::kHalfCross: {
      const Vector on_vertical = make_vector({0.0, x(1)});
      const Vector on_ray = make_vector({std::max(x(0), 0.0), 0.0});
      return (x - on_vertical).norm() <= (x - on_ray).norm() ? on_vertical : on_ray;
    }
    case Kind::kLineFamily: {
      if (x(0) >= 0.5) return make_vector({0.5, x(1)});
      const double j = 1.0 / (2.0 * x(0));
      const double k1 = std::max(1.0, std::floor(j));
      const double a = 1.0 / (2.0 * k1);
      const double b = 1.0 / (2.0 * (k1 + 1.0));
      return make_vector({std::abs(x(0) - a) <= std::abs(x(0) - b) ? a : b, x(1)});
    }
    case Kind::kEmpty:
      break;
  }
  throw DomainError("nearest point of an empty set");
}

double SingularSet::distance(const Vector& x) const {
  if (x.size() != dimension_) throw DomainError("singular set: dimension mismatch");
  switch (kind_) {
    case Kind::kEmpty:
      return kInf;
    case Kind::kPolyline: {
      double dist = kInf;
      for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
        dist = std::min(dist, segment_distance(x, points_[i], points_[i + 1]));
      }
      return dist;
    }
    case Kind::kLineFamily:
      require_plane(x, "line_family");
      // The lines accumulate at x1 = 0, which is not itself part of S.
      if (x(0) <= 0.0) return -x(0);
      return std::abs(x(0) - nearest(x)(0));
    default:
      return (x - nearest(x)).norm();
  }
}

std::optional<Vector> SingularSet::witness_in_ball(const Vector& center,
                                                   double radius) const {
  const double d = distance(center);
  if (!(d < radius - kTouchTolerance)) return std::nullopt;
  Vector p;
  if (kind_ == Kind::kLineFamily && center(0) <= 0.0) {
    // Smallest k with 1/(2k) < x1 + radius.
    const double reach = center(0) + radius;
    const double k = std::floor(1.0 / (2.0 * reach)) + 1.0;
    p = make_vector({1.0 / (2.0 * k), center(1)});
  } else {
    p = nearest(center);
  }
  if (!((p - center).norm() < radius)) return std::nullopt;
  return p;
}

nlohmann::json SingularSet::to_json() const {
  nlohmann::json j = {{"kind", kind_name()}, {"dimension", dimension_}};
  if (kind_ == Kind::kPoints || kind_ == Kind::kPolyline) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points_) pts.push_back(vector_to_json(p));
    j[kind_ == Kind::kPoints ? "points" : "vertices"] = pts;
  }
  if (kind_ == Kind::kPolyline) j["max_second_difference"] = second_difference_;
  return j;
}

// ---------------------------------------------------------------------------

double TestSet::distance(const Vector& x) const {
  double dist = kInf;
  for (const auto& p : points) dist = std::min(dist, (x - p).norm());
  for (const auto& b : boxes) {
    const Vector clamped = x.cwiseMax(b.lower).cwiseMin(b.upper);
    dist = std::min(dist, (x - clamped).norm());
  }
  return dist;
}

nlohmann::json TestSet::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back(vector_to_json(p));
  nlohmann::json bx = nlohmann::json::array();
  for (const auto& b : boxes) {
    bx.push_back({{"lower", vector_to_json(b.lower)},
                  {"upper", vector_to_json(b.upper)}});
  }
  return {{"points", pts}, {"boxes", bx}};
}

void SingularSetScene::validate() const {
  const int n = omega.dimension();
  if (singular.dimension() != n) throw PreconditionError("scene: S has wrong dimension");
  if (T.empty()) throw PreconditionError("scene: T must be nonempty");
  for (const auto& p : T.points) {
    if (p.size() != n || !omega.contains(p)) {
      throw PreconditionError("scene: T point outside Ω");
    }
  }
  for (const auto& b : T.boxes) {
    if (b.lower.size() != n || b.upper.size() != n ||
        !(b.lower.array() <= b.upper.array()).all()) {
      throw PreconditionError("scene: malformed T box");
    }
    if ((b.lower.array() <= omega.lower().array()).all() &&
        (b.upper.array() >= omega.upper().array()).all()) {
      throw PreconditionError("degenerate scene: T covers Ω");
    }
  }
}

SingularSetScene SingularSetScene::from_json(const nlohmann::json& j) {
  reject_unknown(j, {"omega", "singular", "T"}, "scene");
  for (const char* key : {"omega", "singular", "T"}) {
    if (!j.contains(key)) throw ParseError(std::string("scene: missing '") + key + "'");
  }
  const auto& o = j.at("omega");
  const std::string okind = o.value("kind", "");
  DomainShape omega = DomainShape::cube(2);
  if (okind == "cube") {
    reject_unknown(o, {"kind", "n"}, "omega");
    omega = DomainShape::cube(o.value("n", 2));
  } else if (okind == "box") {
    reject_unknown(o, {"kind", "lower", "upper"}, "omega");
    omega = DomainShape::box(json_vector(o.at("lower"), "lower"),
                             json_vector(o.at("upper"), "upper"));
  } else if (okind == "ball") {
    reject_unknown(o, {"kind", "center", "radius"}, "omega");
    omega = DomainShape::ball(json_vector(o.at("center"), "center"),
                              o.at("radius").get<double>());
  } else {
    throw ParseError("scene: unknown omega kind '" + okind + "'");
  }

  const auto& s = j.at("singular");
  const std::string skind = s.value("kind", "");
  std::optional<SingularSet> singular;
  // Written by to_json; dimension must agree, the curve statistic is recomputed.
  if (s.contains("dimension") && s.at("dimension").get<int>() != omega.dimension()) {
    throw PreconditionError("scene: singular set dimension differs from omega");
  }
  if (skind == "empty") {
    reject_unknown(s, {"kind", "dimension"}, "singular");
    singular = SingularSet::empty(omega.dimension());
  } else if (skind == "finite_points") {
    reject_unknown(s, {"kind", "dimension", "points"}, "singular");
    singular = SingularSet::points(json_points(s.at("points"), "points"));
  } else if (skind == "c2_curve") {
    reject_unknown(s, {"kind", "dimension", "vertices", "max_second_difference"}, "singular");
    singular = SingularSet::polyline(json_points(s.at("vertices"), "vertices"));
  } else if (skind == "axis_cross") {
    reject_unknown(s, {"kind", "dimension"}, "singular");
    singular = SingularSet::axis_cross();
  } else if (skind == "half_cross") {
    reject_unknown(s, {"kind", "dimension"}, "singular");
    singular = SingularSet::half_cross();
  } else if (skind == "line_family") {
    reject_unknown(s, {"kind", "dimension"}, "singular");
    singular = SingularSet::line_family();
  } else {
    throw ParseError("scene: unknown singular kind '" + skind + "'");
  }

  const auto& t = j.at("T");
  reject_unknown(t, {"points", "boxes"}, "T");
  TestSet T;
  if (t.contains("points")) T.points = json_points(t.at("points"), "T.points");
  if (t.contains("boxes")) {
    for (const auto& b : t.at("boxes")) {
      reject_unknown(b, {"lower", "upper"}, "T.boxes");
      T.boxes.push_back({json_vector(b.at("lower"), "lower"),
                         json_vector(b.at("upper"), "upper")});
    }
  }
  SingularSetScene scene{omega, *singular, T};
  scene.validate();
  return scene;
}

SingularSetScene SingularSetScene::preset(const std::string& name) {
  const DomainShape square = DomainShape::cube(2);
  const TestSet origin{{make_vector({0.0, 0.0})}, {}};
  SingularSetScene scene{square, SingularSet::empty(2), origin};
  if (name == "finite_points") {
    scene.singular = SingularSet::points(
        {make_vector({0.5, 0.5}), make_vector({-0.5, 0.25})});
    scene.T = TestSet{{make_vector({-0.6, -0.6})}, {}};
  } else if (name == "axis_cross") {
    scene.singular = SingularSet::axis_cross();
  } else if (name == "half_cross") {
    scene.singular = SingularSet::half_cross();
  } else if (name == "line_family") {
    scene.singular = SingularSet::line_family();
    scene.T = TestSet{{}, {{make_vector({-1.0, -1.0}), make_vector({0.0, 1.0})}}};
  } else if (name == "dense_cloud") {
    std::vector<Vector> pts;
    for (int i = -15; i <= 15; ++i) {
      for (int k = -15; k <= 15; ++k) pts.push_back(make_vector({0.02 * i, 0.02 * k}));
    }
    scene.singular = SingularSet::points(std::move(pts));
  } else if (name != "empty") {
    throw ParseError("unknown scene preset '" + name + "'");
  }
  scene.validate();
  return scene;
}

nlohmann::json SingularSetScene::to_json() const {
  return {{"omega", omega.to_json()}, {"singular", singular.to_json()},
          {"T", T.to_json()}};
}

// ---------------------------------------------------------------------------

std::vector<Vector> grid_centers(const DomainShape& omega, double h) {
  if (!(h > 0.0)) throw PreconditionError("grid resolution must be positive");
  const int n = omega.dimension();
  const Vector mid = 0.5 * (omega.lower() + omega.upper());
  const double half = 0.5 * (omega.upper() - omega.lower()).maxCoeff();
  const int m = static_cast<int>(std::ceil(half / h));
  if (std::pow(2.0 * m + 1.0, n) > 5e7) {
    throw PreconditionError("grid resolution too fine for this dimension");
  }
  std::vector<Vector> out;
  Vector x(n);
  for_each_offset(n, m, [&](const std::vector<int>& idx) {
    for (int d = 0; d < n; ++d) x(d) = mid(d) + idx[d] * h;
    if (omega.contains(x)) out.push_back(x);
  });
  return out;
}

nlohmann::json OutwardBallResult::to_json() const {
  nlohmann::json j = {{"h", h}, {"centers_tested", centers_tested}};
  if (!found) {
    j["status"] = "not_found_at_resolution";
    return j;
  }
  j["status"] = "found";
  j["center"] = vector_to_json(center);
  j["radius"] = radius;
  j["distance_to_T"] = distance_to_T;
  j["distance_to_S"] = distance_to_S;
  j["distance_to_boundary"] = distance_to_boundary;
  return j;
}

OutwardBallResult outward_ball_search(const SingularSetScene& scene, double h) {
  scene.validate();
  const auto centers = grid_centers(scene.omega, h);
  struct Eval {
    bool ok = false;
    double R = 0.0, dS = 0.0, dB = 0.0;
  };
  std::vector<Eval> evals(centers.size());
  parallel_for(centers.size(), [&](std::size_t i) {
    const Vector& x = centers[i];
    Eval e;
    e.R = scene.T.distance(x);
    e.dS = scene.singular.distance(x);
    e.dB = scene.omega.boundary_distance(x);
    e.ok = e.R > 0.0 && e.dS > 0.0 && e.dS >= e.R - kTouchTolerance &&
           e.dB >= e.R - kTouchTolerance;
    evals[i] = e;
  });
  OutwardBallResult result;
  result.h = h;
  result.centers_tested = centers.size();
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const Eval& e = evals[i];
    if (!e.ok) continue;
    if (!result.found || e.R > result.radius + kTouchTolerance) {
      result.found = true;
      result.center = centers[i];
      result.radius = e.R;
      result.distance_to_T = e.R;
      result.distance_to_S = e.dS;
      result.distance_to_boundary = e.dB;
    }
  }
  return result;
}

nlohmann::json FalsificationReport::to_json() const {
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& e : examples) {
    ex.push_back({{"center", vector_to_json(e.center)},
                  {"radius", e.radius},
                  {"witness", vector_to_json(e.witness)}});
  }
  nlohmann::json j = {{"h", h},
                      {"candidates", candidates},
                      {"witnessed", witnessed},
                      {"verdict", falsified ? "falsified_at_resolution" : "not_falsified"},
                      {"examples", ex}};
  if (unwitnessed_center) j["unwitnessed_center"] = vector_to_json(*unwitnessed_center);
  return j;
}

FalsificationReport falsify_outward_ball(const SingularSetScene& scene, double h) {
  scene.validate();
  const auto centers = grid_centers(scene.omega, h);
  struct Eval {
    bool candidate = false;
    double R = 0.0;
    std::optional<Vector> witness;
  };
  std::vector<Eval> evals(centers.size());
  parallel_for(centers.size(), [&](std::size_t i) {
    const Vector& x = centers[i];
    Eval e;
    e.R = scene.T.distance(x);
    e.candidate = e.R > 0.0 && scene.singular.distance(x) > 0.0 &&
                  scene.omega.boundary_distance(x) >= e.R - kTouchTolerance;
    if (e.candidate) e.witness = scene.singular.witness_in_ball(x, e.R);
    evals[i] = std::move(e);
  });
  FalsificationReport report;
  report.h = h;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const Eval& e = evals[i];
    if (!e.candidate) continue;
    ++report.candidates;
    if (e.witness) {
      ++report.witnessed;
      if (report.examples.size() < kReportedExamples) {
        report.examples.push_back({centers[i], e.R, *e.witness});
      }
    } else if (!report.unwitnessed_center) {
      report.unwitnessed_center = centers[i];
    }
  }
  report.falsified = report.candidates > 0 && report.witnessed == report.candidates;
  return report;
}

nlohmann::json PorosityReport::to_json() const {
  return {{"scales", scales}, {"ratios", ratios}, {"tolerance", tolerance},
          {"pass", pass}};
}

PorosityReport porosity_check(const SingularSetScene& scene, const Vector& s,
                              const std::vector<double>& scales,
                              double tolerance) {
  const int n = scene.omega.dimension();
  if (s.size() != n) throw PreconditionError("porosity_check: dimension mismatch");
  if (!(scene.singular.distance(s) <= kTouchTolerance)) {
    throw PreconditionError("porosity_check: s must belong to S");
  }
  if (scales.empty() || n > 3) {
    throw PreconditionError("porosity_check: need scales and n <= 3");
  }
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0) || (i > 0 && !(scales[i] < scales[i - 1]))) {
      throw PreconditionError("porosity_check: scales must be positive and decreasing");
    }
  }
  constexpr int kSteps = 100;
  PorosityReport report;
  report.scales = scales;
  report.tolerance = tolerance;
  report.pass = true;
  for (double r : scales) {
    const double step = r / kSteps;
    std::vector<Vector> pts;
    Vector y(n);
    for_each_offset(n, kSteps, [&](const std::vector<int>& idx) {
      for (int d = 0; d < n; ++d) y(d) = s(d) + idx[d] * step;
      if ((y - s).norm() < r) pts.push_back(y);
    });
    std::vector<double> rho(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
      rho[i] = std::min(r - (pts[i] - s).norm(), scene.singular.distance(pts[i]));
    });
    const double gamma = *std::max_element(rho.begin(), rho.end());
    const double ratio = 2.0 * gamma / r;
    report.ratios.push_back(ratio);
    if (ratio < 1.0 - tolerance) report.pass = false;
  }
  return report;
}

// ---------------------------------------------------------------------------

double cone_kappa(double theta) {
  if (!(theta > 0.0 && theta <= std::numbers::pi / 2)) {
    throw PreconditionError("cone half-angle must lie in (0, pi/2]");
  }
  const double s = std::sin(theta);
  // Written over a common denominator so that 4/5 and 7/8 come out exact.
  return (3.0 + s) / (3.0 + 2.0 * s);
}

nlohmann::json ConeChain::to_json() const {
  nlohmann::json c = nlohmann::json::array();
  for (const auto& y : centers) c.push_back(vector_to_json(y));
  return {{"apex", vector_to_json(apex)}, {"axis", vector_to_json(axis)},
          {"theta", theta}, {"r0", r0}, {"kappa", kappa}, {"centers", c},
          {"radii", radii}, {"nesting_margins", nesting_margins}};
}

ConeChain cone_chain(const Vector& apex, const Vector& axis, double theta,
                     double r0, int count) {
  if (count < 2 || !(r0 > 0.0) || axis.size() != apex.size() || axis.norm() == 0.0) {
    throw PreconditionError("cone_chain: need count >= 2, r0 > 0 and a nonzero axis");
  }
  ConeChain chain{apex, axis / axis.norm(), theta, r0, cone_kappa(theta), {}, {}, {}};
  const double s = std::sin(theta);
  double scale = 1.0;
  for (int k = 0; k < count; ++k) {
    chain.centers.push_back(apex + (r0 / s) * scale * chain.axis);
    chain.radii.push_back(r0 * scale);
    scale *= chain.kappa;
  }
  for (int k = 0; k + 1 < count; ++k) {
    const double lhs = (chain.centers[k] - chain.centers[k + 1]).norm() + chain.radii[k] / 3.0;
    const double rhs = 2.0 * chain.radii[k + 1] / 3.0;
    const double margin = rhs - lhs;
    chain.nesting_margins.push_back(margin);
    if (margin < -1e-12) {
      throw DomainError("cone_chain: nested balls violate inclusion at k = " +
                        std::to_string(k));
    }
  }
  return chain;
}

double unit_ball_volume(int n) {
  if (n < 1) throw PreconditionError("unit_ball_volume: n >= 1");
  return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

double loglog_slope(const std::vector<double>& distances,
                    const std::vector<double>& values) {
  if (distances.size() != values.size() || distances.size() < 2) {
    throw PreconditionError("loglog_slope: need two or more matched samples");
  }
  const std::size_t m = distances.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(distances[i] > 0.0) || !(values[i] > 0.0)) {
      throw DomainError("loglog_slope: samples must be positive");
    }
    const double x = std::log(distances[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw DomainError("loglog_slope: degenerate distances");
  return (m * sxy - sx * sy) / denom;
}

nlohmann::json OrderCertificate::to_json() const {
  nlohmann::json j = {{"kappa", kappa}, {"C", C}, {"n", n}, {"L", L},
                      {"m_star", m_star},
                      {"status", inconclusive ? "inconclusive" : "finite_order_bound"}};
  if (fitted_slope) j["fitted_slope"] = *fitted_slope;
  return j;
}

OrderCertificate order_certificate(
    double kappa, double C, int n,
    const std::vector<std::pair<double, double>>& samples) {
  if (!(C > 0.0)) throw PreconditionError("order_certificate: C must be positive");
  if (!(kappa > 0.0 && kappa < 1.0)) {
    throw PreconditionError("order_certificate: kappa must lie in (0, 1)");
  }
  OrderCertificate cert;
  cert.kappa = kappa;
  cert.C = C;
  cert.n = n;
  cert.L = unit_ball_volume(n) / (C * std::pow(3.0, n));
  int m = cert.L >= 1.0 ? 0
                        : static_cast<int>(std::floor(std::log(cert.L) / std::log(kappa))) + 1;
  // Guard the floor against rounding in the logarithms.
  while (std::pow(kappa, m) >= cert.L) ++m;
  while (m > 0 && std::pow(kappa, m - 1) < cert.L) --m;
  cert.m_star = m;
  if (!samples.empty()) {
    std::vector<double> d, v;
    for (const auto& [dist, value] : samples) {
      d.push_back(dist);
      v.push_back(value);
    }
    cert.fitted_slope = loglog_slope(d, v);
    cert.inconclusive = *cert.fitted_slope > m;
  }
  return cert;
}

}  // namespace bpplab
