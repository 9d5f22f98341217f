#include "bpplab/weight.hpp"

#include "bpplab/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bpplab {
namespace {

constexpr std::size_t kMonotonicitySamples = 1024;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Strict decimal parser: digits, one optional sign and decimal point.
bool parse_decimal(std::string_view text, double& out) {
  if (text.empty()) return false;
  for (char ch : text) {
    if (!(std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' ||
          ch == '-' || ch == '+')) {
      return false;
    }
  }
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto result = std::from_chars(text.data(), end, out,
                                      std::chars_format::fixed);
  return result.ec == std::errc() && result.ptr == end;
}

double parse_number(std::string_view text, std::string_view context) {
  double value = 0.0;
  const std::string t = trim(text);
  const auto* end = t.data() + t.size();
  const auto result = std::from_chars(t.data(), end, value);
  if (t.empty() || result.ec != std::errc() || result.ptr != end) {
    throw ParseError("weight spec: cannot parse number '" + t + "' in '" +
                     std::string(context) + "'");
  }
  return value;
}

}  // namespace

RadialWeight::RadialWeight(Kind kind, double a, double b, double d_max,
                           std::shared_ptr<const Table> table)
    : kind_(kind), a_(a), b_(b), d_max_(d_max), table_(std::move(table)) {}

RadialWeight RadialWeight::constant(double value, double d_max) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw PreconditionError("constant weight must be positive and finite");
  }
  if (!(d_max > 0.0)) throw PreconditionError("d_max must be positive");
  RadialWeight w(Kind::kConstant, value, 0.0, d_max, nullptr);
  return w;
}

RadialWeight RadialWeight::power(double coeff, double alpha, double d_max) {
  if (!(coeff > 0.0) || !std::isfinite(coeff)) {
    throw PreconditionError("power weight coefficient must be positive");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw PreconditionError("power weight exponent must lie in (0, 1)");
  }
  if (!(d_max > 0.0)) throw PreconditionError("d_max must be positive");
  RadialWeight w(Kind::kPower, coeff, alpha, d_max, nullptr);
  return w;
}

RadialWeight RadialWeight::tabulated(std::vector<double> distances,
                                     std::vector<double> values) {
  if (distances.size() != values.size()) {
    throw PreconditionError("tabulated weight: column lengths differ");
  }
  if (distances.size() < 2) {
    throw PreconditionError("tabulated weight: need at least two samples");
  }
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (!(distances[i] > 0.0) || !std::isfinite(distances[i])) {
      throw PreconditionError("tabulated weight: distances must be positive");
    }
    if (i > 0 && !(distances[i] > distances[i - 1])) {
      throw PreconditionError(
          "tabulated weight: distances must be strictly increasing");
    }
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      throw PreconditionError("tabulated weight: values must be positive");
    }
    if (i > 0 && values[i] > values[i - 1]) {
      throw PreconditionError("tabulated weight: values must be non-increasing");
    }
  }
  auto table = std::make_shared<Table>();
  table->tail_exponent = -std::log(values[1] / values[0]) /
                         std::log(distances[1] / distances[0]);
  const double d_max = distances.back();
  table->distances = std::move(distances);
  table->values = std::move(values);
  RadialWeight w(Kind::kTabulated, 0.0, 0.0, d_max, std::move(table));
  w.check_sampled_monotonicity();
  // L1 integrability on the whole support; raises DivergenceError when the
  // continuation below the first sample decays like d^-1 or slower.
  w.integrate_first(d_max);
  return w;
}

RadialWeight RadialWeight::sampled(const RadialWeight& source, double d_min,
                                   double d_max, std::size_t count) {
  if (!(d_min > 0.0 && d_max > d_min) || count < 2) {
    throw PreconditionError("sampled weight: need 0 < d_min < d_max, count >= 2");
  }
  std::vector<double> distances(count);
  std::vector<double> values(count);
  const double log_lo = std::log(d_min);
  const double step = (std::log(d_max) - log_lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    distances[i] = i + 1 == count ? d_max
                                  : std::exp(log_lo + step * static_cast<double>(i));
    values[i] = source.eval(distances[i]);
  }
  return tabulated(std::move(distances), std::move(values));
}

RadialWeight RadialWeight::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open weight file '" + path + "'");
  std::vector<double> distances;
  std::vector<double> values;
  std::string line;
  std::size_t line_number = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto comma = t.find(',');
    double d = 0.0;
    double v = 0.0;
    const bool ok = comma != std::string::npos &&
                    t.find(',', comma + 1) == std::string::npos &&
                    parse_decimal(trim(std::string_view(t).substr(0, comma)), d) &&
                    parse_decimal(trim(std::string_view(t).substr(comma + 1)), v);
    if (!ok) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw ParseError(path + ":" + std::to_string(line_number) +
                       ": expected two decimal columns 'distance,value'");
    }
    header_allowed = false;
    distances.push_back(d);
    values.push_back(v);
  }
  return tabulated(std::move(distances), std::move(values));
}

RadialWeight RadialWeight::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw ParseError("weight spec '" + std::string(spec) +
                     "' must look like constant:<v>, power:<c>,<alpha> or "
                     "file:<csv>");
  }
  const std::string kind = trim(spec.substr(0, colon));
  const std::string_view rest = spec.substr(colon + 1);
  if (kind == "constant") return constant(parse_number(rest, spec));
  if (kind == "power") {
    const auto comma = rest.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError("power weight needs '<c>,<alpha>'");
    }
    return power(parse_number(rest.substr(0, comma), spec),
                 parse_number(rest.substr(comma + 1), spec));
  }
  if (kind == "file") return from_csv(trim(rest));
  throw ParseError("unknown weight kind '" + kind + "'");
}

void RadialWeight::check_radius(double r, const char* who) const {
  if (!(r >= 0.0) || r > d_max_) {
    std::ostringstream msg;
    msg << who << ": radius " << r << " outside [0, " << d_max_ << "]";
    throw DomainError(msg.str());
  }
}

double RadialWeight::eval(double d) const {
  if (!(d > 0.0) || d > d_max_) {
    std::ostringstream msg;
    msg << "weight eval: distance " << d << " outside (0, " << d_max_ << "]";
    throw DomainError(msg.str());
  }
  switch (kind_) {
    case Kind::kConstant:
      return a_;
    case Kind::kPower:
      return a_ * std::pow(d, -b_);
    case Kind::kTabulated: {
      const auto& x = table_->distances;
      const auto& y = table_->values;
      if (d <= x.front()) {
        return y.front() * std::pow(d / x.front(), -table_->tail_exponent);
      }
      const auto it = std::lower_bound(x.begin(), x.end(), d);
      const auto i = static_cast<std::size_t>(it - x.begin());
      if (*it == d) return y[i];
      const double t = (d - x[i - 1]) / (x[i] - x[i - 1]);
      return y[i - 1] + t * (y[i] - y[i - 1]);
    }
  }
  return 0.0;
}

std::span<const double> RadialWeight::breakpoints() const {
  if (!table_) return {};
  return table_->distances;
}

double RadialWeight::integrate_first(double r,
                                     const QuadratureOptions& options) const {
  check_radius(r, "integrate_first");
  switch (kind_) {
    case Kind::kConstant:
      return a_ * r;
    case Kind::kPower:
      return a_ * std::pow(r, 1.0 - b_) / (1.0 - b_);
    case Kind::kTabulated:
      return integrate_first_by_quadrature(r, options);
  }
  return 0.0;
}

double RadialWeight::integrate_second(double r,
                                      const QuadratureOptions& options) const {
  check_radius(r, "integrate_second");
  switch (kind_) {
    case Kind::kConstant:
      return 0.5 * a_ * r * r;
    case Kind::kPower:
      return a_ * std::pow(r, 2.0 - b_) / ((1.0 - b_) * (2.0 - b_));
    case Kind::kTabulated:
      return integrate_second_by_quadrature(r, options);
  }
  return 0.0;
}

double RadialWeight::integrate_first_by_quadrature(
    double r, const QuadratureOptions& options) const {
  check_radius(r, "integrate_first");
  return graded_integral([this](double t) { return eval(t); }, r,
                         breakpoints(), options)
      .value;
}

double RadialWeight::integrate_second_by_quadrature(
    double r, const QuadratureOptions& options) const {
  check_radius(r, "integrate_second");
  return graded_integral([this, r](double t) { return (r - t) * eval(t); }, r,
                         breakpoints(), options)
      .value;
}

void RadialWeight::check_sampled_monotonicity() const {
  const double hi = std::isfinite(d_max_) ? d_max_ : 1e3;
  const double lo = table_ ? table_->distances.front() * 1e-3 : hi * 1e-9;
  double previous = eval(lo);
  const double step = std::log(hi / lo) / (kMonotonicitySamples - 1);
  for (std::size_t i = 1; i < kMonotonicitySamples; ++i) {
    const double d = i + 1 == kMonotonicitySamples
                         ? hi
                         : lo * std::exp(step * static_cast<double>(i));
    const double value = eval(d);
    if (!(value > 0.0) || value > previous) {
      throw PreconditionError("weight is not positive and non-increasing");
    }
    previous = value;
  }
}

std::string RadialWeight::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind_) {
    case Kind::kConstant:
      out << "constant:" << a_;
      break;
    case Kind::kPower:
      out << "power:" << a_ << "," << b_;
      break;
    case Kind::kTabulated:
      out << "tabulated:" << table_->distances.size() << " samples";
      break;
  }
  return out.str();
}

nlohmann::json RadialWeight::to_json() const {
  nlohmann::json j;
  switch (kind_) {
    case Kind::kConstant:
      j = {{"kind", "constant"}, {"value", a_}};
      break;
    case Kind::kPower:
      j = {{"kind", "power"}, {"coeff", a_}, {"alpha", b_}};
      break;
    case Kind::kTabulated:
      j = {{"kind", "tabulated"},
           {"samples", table_->distances.size()},
           {"tail_exponent", table_->tail_exponent}};
      break;
  }
  if (std::isfinite(d_max_)) j["d_max"] = d_max_;
  return j;
}

}  // namespace bpplab
