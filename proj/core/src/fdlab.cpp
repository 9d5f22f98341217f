#include "bpplab/fdlab.hpp"

#include "bpplab/error.hpp"
#include "bpplab/geometry.hpp"
#include "bpplab/parallel.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <set>

namespace bpplab {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Three-point weights at x_i for the first and second derivative on a
// possibly non-uniform axis.
struct Weights {
  double minus, center, plus;
};

Weights first_difference(double hm, double hp) {
  return {-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp))};
}

Weights second_difference(double hm, double hp) {
  return {2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))};
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ParseError("grid spec must be a JSON object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ParseError("grid spec: unknown key '" + key + "'");
  }
}

// Locates x in a sorted axis: returns the cell index and the fractional
// position inside it. Throws if x is outside [axis.front(), axis.back()].
std::pair<std::size_t, double> locate(const std::vector<double>& axis, double x) {
  const double slack = 1e-12 * std::max(1.0, std::abs(axis.back()));
  if (x < axis.front() - slack || x > axis.back() + slack) {
    throw DomainError("interpolation point lies off the grid");
  }
  x = std::clamp(x, axis.front(), axis.back());
  auto it = std::upper_bound(axis.begin(), axis.end(), x);
  std::size_t i = it == axis.begin() ? 0 : static_cast<std::size_t>(it - axis.begin()) - 1;
  i = std::min(i, axis.size() - 2);
  const double t = (x - axis[i]) / (axis[i + 1] - axis[i]);
  return {i, t};
}

bool near_node(double t) { return t < 1e-12 || t > 1.0 - 1e-12; }

}  // namespace

std::vector<double> graded_axis(double a, double b, int cells, double q) {
  if (cells < 2 || !(b > a)) throw PreconditionError("axis needs b > a and >= 2 cells");
  if (!(q > 0.0 && q <= 1.0)) throw PreconditionError("grading ratio must lie in (0, 1]");
  std::vector<double> x(cells + 1);
  x[0] = a;
  const double first = q == 1.0 ? (b - a) / cells
                                : (b - a) * (1.0 - q) / (1.0 - std::pow(q, cells));
  double step = first;
  for (int i = 1; i < cells; ++i) {
    x[i] = q == 1.0 ? a + (b - a) * i / cells : x[i - 1] + step;
    step *= q;
  }
  x[cells] = b;
  return x;
}

Grid Grid::interval(double a, double b, int cells, double q) {
  Grid g;
  g.kind_ = Kind::kInterval;
  g.first_ = graded_axis(a, b, cells, q);
  g.second_ = {0.0};
  g.grading_ = q;
  return g;
}

Grid Grid::rectangle(Vector lower, Vector upper, int cells_x, int cells_y) {
  if (lower.size() != 2 || upper.size() != 2) {
    throw PreconditionError("rectangle grids are two-dimensional");
  }
  Grid g;
  g.kind_ = Kind::kRectangle;
  g.first_ = graded_axis(lower(0), upper(0), cells_x, 1.0);
  g.second_ = graded_axis(lower(1), upper(1), cells_y, 1.0);
  return g;
}

Grid Grid::polar_annulus(double r_inner, double r_outer, int radial_cells,
                         int angular_cells, double q) {
  if (!(r_inner > 0.0)) throw PreconditionError("annulus inner radius must be positive");
  if (angular_cells < 4) throw PreconditionError("annulus needs >= 4 angular cells");
  Grid g;
  g.kind_ = Kind::kPolarAnnulus;
  g.first_ = graded_axis(r_inner, r_outer, radial_cells, q);
  g.second_.resize(angular_cells);
  for (int j = 0; j < angular_cells; ++j) g.second_[j] = kTwoPi * j / angular_cells;
  g.grading_ = q;
  return g;
}

Vector Grid::point(std::size_t node) const {
  const double a = first_[first_index(node)];
  switch (kind_) {
    case Kind::kInterval:
      return make_vector({a});
    case Kind::kRectangle:
      return make_vector({a, second_[second_index(node)]});
    case Kind::kPolarAnnulus: {
      const double phi = second_[second_index(node)];
      return make_vector({a * std::cos(phi), a * std::sin(phi)});
    }
  }
  return {};
}

bool Grid::is_boundary(std::size_t node) const {
  const std::size_t i = first_index(node);
  if (i == 0 || i + 1 == first_.size()) return true;
  if (kind_ == Kind::kRectangle) {
    const std::size_t j = second_index(node);
    return j == 0 || j + 1 == second_.size();
  }
  return false;
}

nlohmann::json Grid::to_json() const {
  switch (kind_) {
    case Kind::kInterval:
      return {{"kind", "interval"}, {"a", first_.front()}, {"b", first_.back()},
              {"cells", first_.size() - 1}, {"q", grading_}};
    case Kind::kRectangle:
      return {{"kind", "rectangle"},
              {"lower", {first_.front(), second_.front()}},
              {"upper", {first_.back(), second_.back()}},
              {"cells", {first_.size() - 1, second_.size() - 1}}};
    case Kind::kPolarAnnulus:
      return {{"kind", "polar_annulus"}, {"r_inner", first_.front()},
              {"r_outer", first_.back()}, {"radial_cells", first_.size() - 1},
              {"angular_cells", second_.size()}, {"q", grading_}};
  }
  return {};
}

Grid Grid::from_json(const nlohmann::json& j) {
  const std::string kind = j.is_object() ? j.value("kind", "") : "";
  if (kind == "interval") {
    reject_unknown(j, {"kind", "a", "b", "cells", "q"});
    return interval(j.at("a").get<double>(), j.at("b").get<double>(),
                    j.at("cells").get<int>(), j.value("q", 1.0));
  }
  if (kind == "rectangle") {
    reject_unknown(j, {"kind", "lower", "upper", "cells"});
    const auto lo = j.at("lower").get<std::vector<double>>();
    const auto hi = j.at("upper").get<std::vector<double>>();
    const auto cells = j.at("cells").get<std::vector<int>>();
    if (lo.size() != 2 || hi.size() != 2 || cells.size() != 2) {
      throw ParseError("rectangle grid needs two-component lower, upper, cells");
    }
    return rectangle(make_vector({lo[0], lo[1]}), make_vector({hi[0], hi[1]}),
                     cells[0], cells[1]);
  }
  if (kind == "polar_annulus") {
    reject_unknown(j, {"kind", "r_inner", "r_outer", "radial_cells", "angular_cells", "q"});
    return polar_annulus(j.at("r_inner").get<double>(), j.at("r_outer").get<double>(),
                         j.at("radial_cells").get<int>(),
                         j.at("angular_cells").get<int>(), j.value("q", 0.9));
  }
  throw ParseError("unknown grid kind '" + kind + "'");
}

Field Field::sample(std::shared_ptr<const Grid> grid,
                    const std::function<double(const Vector&)>& fn) {
  Field f{grid, Vector(static_cast<Eigen::Index>(grid->size()))};
  parallel_for(grid->size(), [&](std::size_t node) {
    f.values(static_cast<Eigen::Index>(node)) = fn(grid->point(node));
  });
  return f;
}

void Field::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  out << (grid->dimension() == 1 ? "x,value\n" : "x,y,value\n");
  for (std::size_t node = 0; node < grid->size(); ++node) {
    const Vector p = grid->point(node);
    for (Eigen::Index d = 0; d < p.size(); ++d) out << p(d) << ',';
    out << values(static_cast<Eigen::Index>(node)) << '\n';
  }
}

std::vector<StencilEntry> stencil(const OperatorCoefficients& coeffs,
                                  const Grid& grid, std::size_t node) {
  if (grid.is_boundary(node)) {
    throw StencilError("stencil requested at a boundary node");
  }
  if (coeffs.dimension() != grid.dimension()) {
    throw StencilError("operator and grid dimensions differ");
  }
  const auto& ax = grid.first_axis();
  const auto& ay = grid.second_axis();
  const std::size_t i = grid.first_index(node);
  const std::size_t j = grid.second_index(node);
  const Vector x = grid.point(node);
  const Matrix a = coeffs.a(x);
  const Vector b = coeffs.b(x);
  const double c = coeffs.c(x);

  const Weights d1x = first_difference(ax[i] - ax[i - 1], ax[i + 1] - ax[i]);
  const Weights d2x = second_difference(ax[i] - ax[i - 1], ax[i + 1] - ax[i]);

  std::vector<StencilEntry> out;
  auto add_x = [&](const Weights& w, double s, std::size_t jj) {
    out.push_back({grid.index(i - 1, jj), s * w.minus});
    out.push_back({grid.index(i, jj), s * w.center});
    out.push_back({grid.index(i + 1, jj), s * w.plus});
  };

  if (grid.kind() == Grid::Kind::kInterval) {
    add_x(d2x, a(0, 0), 0);
    add_x(d1x, b(0), 0);
    out.push_back({node, c});
  } else {
    std::size_t jm, jp;
    Weights d1y, d2y;
    double rr = 0.0, pp = 0.0, rp = 0.0, br = 0.0, bp = 0.0, r = 1.0;
    if (grid.kind() == Grid::Kind::kRectangle) {
      jm = j - 1;
      jp = j + 1;
      d1y = first_difference(ay[j] - ay[j - 1], ay[j + 1] - ay[j]);
      d2y = second_difference(ay[j] - ay[j - 1], ay[j + 1] - ay[j]);
      rr = a(0, 0);
      pp = a(1, 1);
      rp = a(0, 1);
      br = b(0);
      bp = b(1);
    } else {
      const std::size_t m = ay.size();
      jm = (j + m - 1) % m;
      jp = (j + 1) % m;
      const double hphi = kTwoPi / static_cast<double>(m);
      d1y = {-0.5 / hphi, 0.0, 0.5 / hphi};
      d2y = {1.0 / (hphi * hphi), -2.0 / (hphi * hphi), 1.0 / (hphi * hphi)};
      r = ax[i];
      const Vector er = make_vector({std::cos(ay[j]), std::sin(ay[j])});
      const Vector ep = make_vector({-std::sin(ay[j]), std::cos(ay[j])});
      rr = er.dot(a * er);
      pp = ep.dot(a * ep);
      rp = er.dot(a * ep);
      br = b.dot(er);
      bp = b.dot(ep);
    }
    auto add_y = [&](const Weights& w, double s) {
      out.push_back({grid.index(i, jm), s * w.minus});
      out.push_back({node, s * w.center});
      out.push_back({grid.index(i, jp), s * w.plus});
    };
    const bool polar = grid.kind() == Grid::Kind::kPolarAnnulus;
    // Second derivatives.
    add_x(d2x, rr, j);
    add_y(d2y, polar ? pp / (r * r) : pp);
    // Mixed derivative as the product of the two first differences.
    const double mixed = polar ? 2.0 * rp / r : 2.0 * rp;
    if (mixed != 0.0) {
      const double wx[3] = {d1x.minus, d1x.center, d1x.plus};
      const double wy[3] = {d1y.minus, d1y.center, d1y.plus};
      const std::size_t ii[3] = {i - 1, i, i + 1};
      const std::size_t jj[3] = {jm, j, jp};
      for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) {
          const double w = wx[p] * wy[q];
          if (w != 0.0) out.push_back({grid.index(ii[p], jj[q]), mixed * w});
        }
      }
    }
    // First derivatives, including the polar metric terms.
    add_x(d1x, polar ? br + pp / r : br, j);
    add_y(d1y, polar ? bp / r - 2.0 * rp / (r * r) : bp);
    out.push_back({node, c});
  }

  std::sort(out.begin(), out.end(),
            [](const StencilEntry& l, const StencilEntry& r) { return l.node < r.node; });
  std::vector<StencilEntry> merged;
  for (const auto& e : out) {
    if (!merged.empty() && merged.back().node == e.node) {
      merged.back().weight += e.weight;
    } else {
      merged.push_back(e);
    }
  }
  return merged;
}

Field apply_operator(const OperatorCoefficients& coeffs, const Field& u) {
  const Grid& grid = *u.grid;
  Field out{u.grid, Vector::Zero(u.values.size())};
  bool any_interior = false;
  for (std::size_t node = 0; node < grid.size() && !any_interior; ++node) {
    any_interior = !grid.is_boundary(node);
  }
  if (!any_interior) throw StencilError("grid has no interior nodes");
  parallel_for(grid.size(), [&](std::size_t node) {
    if (grid.is_boundary(node)) return;
    double sum = 0.0;
    for (const auto& e : stencil(coeffs, grid, node)) {
      sum += e.weight * u.values(static_cast<Eigen::Index>(e.node));
    }
    out.values(static_cast<Eigen::Index>(node)) = sum;
  });
  return out;
}

nlohmann::json SolveResult::to_json() const {
  return {{"method", method},
          {"diagonally_dominant", diagonally_dominant},
          {"relative_residual", residual}};
}

SolveResult solve_dirichlet(const OperatorCoefficients& coeffs,
                            std::shared_ptr<const Grid> grid,
                            const std::function<double(const Vector&)>& boundary_data,
                            const std::function<double(const Vector&)>& rhs,
                            const SolveOptions& options) {
  const std::size_t total = grid->size();
  std::vector<long> unknown(total, -1);
  std::vector<std::size_t> interior;
  for (std::size_t node = 0; node < total; ++node) {
    if (!grid->is_boundary(node)) {
      unknown[node] = static_cast<long>(interior.size());
      interior.push_back(node);
    }
  }
  if (interior.empty()) throw StencilError("grid has no interior nodes");

  Vector boundary = Vector::Zero(static_cast<Eigen::Index>(total));
  for (std::size_t node = 0; node < total; ++node) {
    if (grid->is_boundary(node)) {
      boundary(static_cast<Eigen::Index>(node)) = boundary_data(grid->point(node));
    }
  }

  std::vector<std::vector<StencilEntry>> rows(interior.size());
  std::vector<double> c_values(interior.size());
  parallel_for(interior.size(), [&](std::size_t k) {
    const Vector x = grid->point(interior[k]);
    c_values[k] = coeffs.c(x);
    rows[k] = stencil(coeffs, *grid, interior[k]);
  });
  for (double c : c_values) {
    if (c > 0.0) throw PreconditionError("solve_dirichlet requires c <= 0");
  }

  const auto n = static_cast<Eigen::Index>(interior.size());
  Vector b(n);
  std::vector<Eigen::Triplet<double>> triplets;
  bool dominant = true;
  for (std::size_t k = 0; k < interior.size(); ++k) {
    double value = rhs ? rhs(grid->point(interior[k])) : 0.0;
    double diag = 0.0, off = 0.0;
    for (const auto& e : rows[k]) {
      if (e.node == interior[k]) {
        diag = e.weight;
      } else {
        off += std::abs(e.weight);
      }
      if (unknown[e.node] >= 0) {
        triplets.emplace_back(static_cast<int>(k), static_cast<int>(unknown[e.node]), e.weight);
      } else {
        value -= e.weight * boundary(static_cast<Eigen::Index>(e.node));
      }
    }
    if (std::abs(diag) < off * (1.0 - 1e-12)) dominant = false;
    b(static_cast<Eigen::Index>(k)) = value;
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();

  Vector sol;
  std::string method;
  if (dominant) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) {
      throw ConvergenceError("sparse LU factorisation failed",
                             std::numeric_limits<double>::infinity());
    }
    sol = lu.solve(b);
    method = "sparse_lu";
  } else {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
    it.setTolerance(options.iterative_tolerance);
    it.setMaxIterations(options.max_iterations);
    it.compute(A);
    sol = it.solve(b);
    method = "bicgstab";
    if (it.info() != Eigen::Success) {
      throw ConvergenceError("BiCGSTAB did not converge", it.error());
    }
  }

  Field field{grid, boundary};
  for (std::size_t k = 0; k < interior.size(); ++k) {
    field.values(static_cast<Eigen::Index>(interior[k])) = sol(static_cast<Eigen::Index>(k));
  }
  // Residual relative to the largest row magnitude.
  double scale = 0.0, worst = 0.0;
  for (std::size_t k = 0; k < interior.size(); ++k) {
    double lhs = 0.0, magnitude = 0.0;
    for (const auto& e : rows[k]) {
      const double term = e.weight * field.values(static_cast<Eigen::Index>(e.node));
      lhs += term;
      magnitude += std::abs(term);
    }
    const double target = rhs ? rhs(grid->point(interior[k])) : 0.0;
    worst = std::max(worst, std::abs(lhs - target));
    scale = std::max(scale, magnitude + std::abs(target));
  }
  const double relative = scale > 0.0 ? worst / scale : worst;
  if (!(relative <= options.residual_tolerance)) {
    throw ConvergenceError("discrete residual above tolerance", relative);
  }
  return {field, method, dominant, relative};
}

nlohmann::json CsmpReport::to_json() const {
  return {{"interior_max", interior_max},
          {"boundary_max", boundary_max},
          {"margin", margin},
          {"argmax", vector_to_json(argmax)},
          {"argmax_on_boundary", argmax_on_boundary},
          {"constant", constant},
          {"strict", strict}};
}

CsmpReport csmp_check(const Field& field, double tolerance) {
  const Grid& grid = *field.grid;
  CsmpReport r;
  r.interior_max = -std::numeric_limits<double>::infinity();
  r.boundary_max = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const double u = field.values(static_cast<Eigen::Index>(node));
    if (!std::isfinite(u)) throw DomainError("field has a non-finite value");
    double& slot = grid.is_boundary(node) ? r.boundary_max : r.interior_max;
    slot = std::max(slot, u);
    lo = std::min(lo, u);
    if (u > hi) {
      hi = u;
      arg = node;
    }
  }
  r.argmax = grid.point(arg);
  r.argmax_on_boundary = grid.is_boundary(arg);
  r.margin = r.boundary_max - r.interior_max;
  r.constant = hi - lo < 1e-12 * (1.0 + std::abs(hi));
  r.strict = !r.constant && r.interior_max < r.boundary_max - tolerance;
  return r;
}

double interpolate(const Field& field, const Vector& x, bool* on_node) {
  const Grid& grid = *field.grid;
  if (x.size() != grid.dimension()) throw DomainError("interpolation: dimension mismatch");
  auto value = [&](std::size_t i, std::size_t j) {
    return field.values(static_cast<Eigen::Index>(grid.index(i, j)));
  };
  switch (grid.kind()) {
    case Grid::Kind::kInterval: {
      const auto [i, t] = locate(grid.first_axis(), x(0));
      if (on_node) *on_node = near_node(t);
      return (1.0 - t) * value(i, 0) + t * value(i + 1, 0);
    }
    case Grid::Kind::kRectangle: {
      const auto [i, s] = locate(grid.first_axis(), x(0));
      const auto [j, t] = locate(grid.second_axis(), x(1));
      if (on_node) *on_node = near_node(s) && near_node(t);
      return (1 - s) * (1 - t) * value(i, j) + s * (1 - t) * value(i + 1, j) +
             (1 - s) * t * value(i, j + 1) + s * t * value(i + 1, j + 1);
    }
    case Grid::Kind::kPolarAnnulus: {
      const auto [i, s] = locate(grid.first_axis(), x.norm());
      const std::size_t m = grid.second_axis().size();
      double phi = std::atan2(x(1), x(0));
      if (phi < 0.0) phi += kTwoPi;
      const double pos = phi / (kTwoPi / static_cast<double>(m));
      const auto j = static_cast<std::size_t>(std::floor(pos)) % m;
      const double t = pos - std::floor(pos);
      const std::size_t jn = (j + 1) % m;
      if (on_node) *on_node = near_node(s) && near_node(t);
      return (1 - s) * (1 - t) * value(i, j) + s * (1 - t) * value(i + 1, j) +
             (1 - s) * t * value(i, jn) + s * t * value(i + 1, jn);
    }
  }
  return 0.0;
}

nlohmann::json HopfReport::to_json() const {
  return {{"h", h},
          {"quotients", quotients},
          {"interpolated", interpolated},
          {"extrapolated", extrapolated},
          {"positive", positive},
          {"converging", converging},
          {"fitted_order", fitted_order},
          {"boundary_max", boundary_max}};
}

HopfReport hopf_quotient(const Field& field, const Vector& x_b, const Vector& nu,
                         const std::vector<double>& h_sequence, double tolerance) {
  if (h_sequence.size() < 2) throw PreconditionError("hopf_quotient needs >= 2 steps");
  for (std::size_t k = 0; k < h_sequence.size(); ++k) {
    if (!(h_sequence[k] > 0.0) || (k > 0 && !(h_sequence[k] < h_sequence[k - 1]))) {
      throw PreconditionError("hopf_quotient: steps must be positive and decreasing");
    }
  }
  if (std::abs(nu.norm() - 1.0) > 1e-12) {
    throw PreconditionError("hopf_quotient: normal must be a unit vector");
  }
  HopfReport r;
  r.h = h_sequence;
  const double ub = interpolate(field, x_b);
  r.boundary_max = ub >= field.values.maxCoeff() - 1e-12 * (1.0 + std::abs(ub));
  for (double h : h_sequence) {
    bool on_node = false;
    const double inner = interpolate(field, x_b - h * nu, &on_node);
    r.quotients.push_back((ub - inner) / h);
    r.interpolated.push_back(!on_node);
  }
  const std::size_t last = r.quotients.size() - 1;
  const double t = h_sequence[last - 1] / h_sequence[last];
  r.extrapolated = (t * r.quotients[last] - r.quotients[last - 1]) / (t - 1.0);
  r.positive = r.extrapolated > tolerance;
  r.converging = r.quotients.size() >= 3;
  for (std::size_t k = 2; k < r.quotients.size(); ++k) {
    const double prev = std::abs(r.quotients[k - 1] - r.quotients[k - 2]);
    const double cur = std::abs(r.quotients[k] - r.quotients[k - 1]);
    if (!(cur < prev)) r.converging = false;
  }
  std::vector<double> mags;
  for (double q : r.quotients) mags.push_back(std::abs(q));
  if (std::all_of(mags.begin(), mags.end(), [](double q) { return q > 0.0; })) {
    r.fitted_order = loglog_slope(h_sequence, mags);
  }
  return r;
}

}  // namespace bpplab
