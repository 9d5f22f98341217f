#include "cli/commands.hpp"

#include "bpplab/barrier.hpp"
#include "bpplab/counterexamples.hpp"
#include "bpplab/fdlab.hpp"
#include "bpplab/geometry.hpp"
#include "bpplab/operator.hpp"
#include "bpplab/weight.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace bpplab::cli {
namespace {

using json = nlohmann::json;

// Default parameters per command; a null default means "optional, absent".
const std::map<std::string, json>& schemas() {
  static const std::map<std::string, json> s = {
      {"barrier",
       {{"n", 2}, {"R", 2.0}, {"m", 1.0}, {"eps", nullptr}, {"weight", "constant:1"},
        {"coeffs", {{"family", "adversarial"}}}, {"samples", 10000}}},
      {"verify-operator",
       {{"n", 2}, {"R", 1.0}, {"weight", "constant:1"},
        {"coeffs", {{"family", "adversarial"}}}, {"samples", 10000}}},
      {"outward-ball",
       {{"scene", "finite_points"}, {"h", {0.1, 0.05, 0.025}}, {"expect", nullptr}}},
      {"csmp",
       {{"grid", {{"kind", "polar_annulus"}, {"r_inner", 1.0}, {"r_outer", 2.0},
                  {"radial_cells", 48}, {"angular_cells", 64}, {"q", 0.9}}},
        {"weight", "power:2,0.5"}, {"coeffs", {{"family", "singular_c"}}},
        {"boundary", {{"lower", 1.0}, {"upper", 0.0}}}, {"csv", nullptr}}},
      {"hopf",
       {{"grid", {{"kind", "polar_annulus"}, {"r_inner", 1.0}, {"r_outer", 2.0},
                  {"radial_cells", 48}, {"angular_cells", 64}, {"q", 0.9}}},
        {"weight", "power:2,0.5"}, {"coeffs", {{"family", "singular_c"}}},
        {"boundary", {{"lower", -1.0}, {"upper", 0.0}}}, {"hseq", nullptr},
        {"x_b", nullptr}, {"nu", nullptr}, {"csv", nullptr}}},
      {"case", {{"id", nullptr}, {"budget", 4000}}},
      {"order",
       {{"kappa", nullptr}, {"theta", nullptr}, {"C", 100.0}, {"n", 2},
        {"samples", nullptr}}},
  };
  return s;
}

// Parameters merged over defaults; unknown keys are usage errors.
json resolve(const std::string& command, const json& given) {
  const auto it = schemas().find(command);
  if (it == schemas().end()) throw UsageError("unknown command '" + command + "'");
  if (!given.is_object()) throw UsageError("parameters must be a JSON object");
  json p = it->second;
  for (const auto& [key, value] : given.items()) {
    if (!p.contains(key)) {
      throw UsageError("unknown parameter '" + key + "' for command '" + command + "'");
    }
    p[key] = value;
  }
  return p;
}

template <typename T>
T get(const json& p, const char* key) {
  try {
    return p.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("parameter '") + key + "' has the wrong type");
  }
}

RadialWeight weight_param(const json& p) {
  return RadialWeight::parse(get<std::string>(p, "weight"));
}

json coeffs_param(const json& p) {
  json c = p.at("coeffs");
  if (c.is_string()) c = json_or_file(c.get<std::string>());
  if (c.is_string()) c = json{{"family", c.get<std::string>()}};
  return c;
}

Vector vector_param(const json& value, const char* key) {
  std::vector<double> v;
  try {
    v = value.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw UsageError(std::string("parameter '") + key + "' must be a list of numbers");
  }
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

Vector origin(int n) { return Vector::Zero(n); }

json run_barrier(const json& p, std::uint64_t seed, bool& pass) {
  const int n = get<int>(p, "n");
  const double R = get<double>(p, "R");
  const double m = get<double>(p, "m");
  const auto weight = weight_param(p);
  const Barrier barrier = p.at("eps").is_null()
                              ? Barrier::with_admissible_epsilon(n, R, m, weight)
                              : Barrier(n, R, get<double>(p, "eps"), m, weight);
  const Ball ball{origin(n), R};
  const auto coeffs = make_coefficient_family(coeffs_param(p), n, ball, weight);
  const auto samples = annulus_samples(barrier, get<std::size_t>(p, "samples"), seed);
  const auto residual = residual_check(barrier, coeffs, samples);

  Vector outer = origin(n), inner = origin(n);
  outer(0) = R;
  inner(0) = R - barrier.eps();
  const double v_outer = barrier.eval(outer).value;
  const double v_inner = barrier.eval(inner).value;
  const bool boundary_ok = std::abs(v_outer) <= 1e-12 && std::abs(v_inner - m) <= 1e-12;
  pass = residual.pass && boundary_ok;
  return {{"barrier", barrier.to_json()},
          {"coefficients", coeffs.name()},
          {"value_on_outer_sphere", v_outer},
          {"value_on_inner_sphere", v_inner},
          {"boundary_values_ok", boundary_ok},
          {"residual", residual.to_json()}};
}

json run_verify_operator(const json& p, std::uint64_t seed, bool& pass) {
  const int n = get<int>(p, "n");
  const double R = get<double>(p, "R");
  const auto weight = weight_param(p);
  const Ball ball{origin(n), R};
  const auto coeffs = make_coefficient_family(coeffs_param(p), n, ball, weight);
  GrowthSampling sampling;
  sampling.samples = get<std::size_t>(p, "samples");
  sampling.seed = seed;
  const auto cert = growth_check(coeffs, weight, ball, sampling);
  pass = cert.pass();
  return {{"coefficients", coeffs.name()}, {"certificate", cert.to_json()}};
}

SingularSetScene scene_param(const json& p) {
  json s = p.at("scene");
  if (s.is_string()) s = json_or_file(s.get<std::string>());
  auto scene = s.is_string() ? SingularSetScene::preset(s.get<std::string>())
                             : SingularSetScene::from_json(s);
  scene.validate();
  return scene;
}

json run_outward_ball(const json& p, bool& pass) {
  const auto scene = scene_param(p);
  const auto hs = get<std::vector<double>>(p, "h");
  if (hs.empty()) throw UsageError("parameter 'h' needs at least one resolution");
  json runs = json::array();
  bool all_found = true, all_falsified = true;
  for (double h : hs) {
    const auto search = outward_ball_search(scene, h);
    const auto fals = falsify_outward_ball(scene, h);
    all_found = all_found && search.found;
    all_falsified = all_falsified && fals.falsified;
    runs.push_back({{"h", h}, {"search", search.to_json()}, {"falsification", fals.to_json()}});
  }
  json report = {{"scene", scene.to_json()}, {"resolutions", runs}};
  pass = true;
  if (!p.at("expect").is_null()) {
    const auto expect = get<std::string>(p, "expect");
    if (expect == "found") {
      pass = all_found;
    } else if (expect == "falsified") {
      pass = all_falsified;
    } else {
      throw UsageError("parameter 'expect' must be 'found' or 'falsified'");
    }
    report["expect"] = expect;
  }
  return report;
}

// Everything the finite-difference commands share.
struct FdProblem {
  std::shared_ptr<const Grid> grid;
  Ball ball;
  std::optional<OperatorCoefficients> coeffs;
  double lower = 0.0;
  double upper = 0.0;
  double axis_lo = 0.0;
  double axis_hi = 0.0;
};

FdProblem fd_problem(const json& p) {
  FdProblem fd;
  json g = p.at("grid");
  if (g.is_string()) g = json_or_file(g.get<std::string>());
  fd.grid = std::make_shared<const Grid>(Grid::from_json(g));
  const auto& first = fd.grid->first_axis();
  fd.axis_lo = first.front();
  fd.axis_hi = first.back();
  // Distances in the growth bounds are measured to the boundary of a ball
  // containing the grid: the outer circle for annuli, the interval itself
  // in 1D, the circumscribed disk for rectangles.
  switch (fd.grid->kind()) {
    case Grid::Kind::kPolarAnnulus:
      fd.ball = {make_vector({0.0, 0.0}), fd.axis_hi};
      break;
    case Grid::Kind::kInterval:
      fd.ball = {make_vector({0.5 * (fd.axis_lo + fd.axis_hi)}),
                 0.5 * (fd.axis_hi - fd.axis_lo)};
      break;
    case Grid::Kind::kRectangle: {
      const auto& second = fd.grid->second_axis();
      const Vector lo = make_vector({fd.axis_lo, second.front()});
      const Vector hi = make_vector({fd.axis_hi, second.back()});
      fd.ball = {0.5 * (lo + hi), 0.5 * (hi - lo).norm() * (1.0 + 1e-9)};
      break;
    }
  }
  fd.coeffs.emplace(make_coefficient_family(coeffs_param(p), fd.grid->dimension(),
                                            fd.ball, weight_param(p)));
  const json& b = p.at("boundary");
  if (!b.is_object() || !b.contains("lower") || !b.contains("upper") || b.size() != 2) {
    throw UsageError("parameter 'boundary' must be {\"lower\": v, \"upper\": v}");
  }
  fd.lower = b.at("lower").get<double>();
  fd.upper = b.at("upper").get<double>();
  return fd;
}

// Boundary data linear in the first grid coordinate (x, or r on annuli).
SolveResult fd_solve(const FdProblem& fd) {
  const bool polar = fd.grid->kind() == Grid::Kind::kPolarAnnulus;
  auto data = [&fd, polar](const Vector& x) {
    const double s = polar ? x.norm() : x(0);
    const double t = (s - fd.axis_lo) / (fd.axis_hi - fd.axis_lo);
    return fd.lower + (fd.upper - fd.lower) * std::clamp(t, 0.0, 1.0);
  };
  return solve_dirichlet(*fd.coeffs, fd.grid, data);
}

json run_csmp(const json& p, bool& pass) {
  const auto fd = fd_problem(p);
  const auto solved = fd_solve(fd);
  const auto report = csmp_check(solved.field);
  if (!p.at("csv").is_null()) solved.field.write_csv(get<std::string>(p, "csv"));
  pass = report.constant || (report.strict && report.margin > 0.0);
  return {{"grid", fd.grid->to_json()},
          {"coefficients", fd.coeffs->name()},
          {"solve", solved.to_json()},
          {"csmp", report.to_json()}};
}

json run_hopf(const json& p, bool& pass) {
  const auto fd = fd_problem(p);
  const auto solved = fd_solve(fd);
  if (!p.at("csv").is_null()) solved.field.write_csv(get<std::string>(p, "csv"));
  const int n = fd.grid->dimension();
  Vector x_b = origin(n), nu = origin(n);
  x_b(0) = fd.axis_hi;
  nu(0) = 1.0;
  if (fd.grid->kind() == Grid::Kind::kRectangle) {
    const auto& second = fd.grid->second_axis();
    x_b(1) = 0.5 * (second.front() + second.back());
  }
  if (!p.at("x_b").is_null()) x_b = vector_param(p.at("x_b"), "x_b");
  if (!p.at("nu").is_null()) nu = vector_param(p.at("nu"), "nu");
  if (x_b.size() != n || nu.size() != n) {
    throw UsageError("x_b and nu must match the grid dimension");
  }
  std::vector<double> hseq;
  if (p.at("hseq").is_null()) {
    const double width = fd.axis_hi - fd.axis_lo;
    for (double h = width / 8.0; hseq.size() < 5; h *= 0.5) hseq.push_back(h);
  } else {
    hseq = get<std::vector<double>>(p, "hseq");
  }
  const auto report = hopf_quotient(solved.field, x_b, nu, hseq);
  pass = report.positive && report.converging;
  return {{"grid", fd.grid->to_json()},
          {"coefficients", fd.coeffs->name()},
          {"solve", solved.to_json()},
          {"x_b", vector_to_json(x_b)},
          {"nu", vector_to_json(nu)},
          {"hopf", report.to_json()}};
}

json run_case(const json& p, std::uint64_t seed, bool& pass) {
  if (p.at("id").is_null()) throw UsageError("command 'case' needs an id");
  const auto study = instantiate(parse_case(get<std::string>(p, "id")));
  const auto report = evaluate(study, {get<std::size_t>(p, "budget"), seed});
  pass = report.matches_expected();
  return report.to_json();
}

json run_order(const json& p, bool& pass) {
  const bool has_kappa = !p.at("kappa").is_null();
  const bool has_theta = !p.at("theta").is_null();
  if (has_kappa == has_theta) throw UsageError("give exactly one of 'kappa' and 'theta'");
  const double kappa =
      has_kappa ? get<double>(p, "kappa") : cone_kappa(get<double>(p, "theta"));
  std::vector<std::pair<double, double>> samples;
  if (!p.at("samples").is_null()) {
    samples = get<std::vector<std::pair<double, double>>>(p, "samples");
  }
  const auto cert = order_certificate(kappa, get<double>(p, "C"), get<int>(p, "n"), samples);
  pass = true;
  json report = cert.to_json();
  if (has_theta) report["theta"] = get<double>(p, "theta");
  return report;
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  RunConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "command") {
      c.command = value.get<std::string>();
    } else if (key == "parameters") {
      c.parameters = value;
    } else if (key == "output") {
      c.output = value.get<std::string>();
    } else if (key == "seed") {
      c.seed = value.get<std::uint64_t>();
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  return c;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : schemas()) out.push_back(name);
    return out;
  }();
  return names;
}

nlohmann::json command_schema(const std::string& command) {
  const auto it = schemas().find(command);
  if (it == schemas().end()) throw UsageError("unknown command '" + command + "'");
  return it->second;
}

RunOutcome run(const RunConfig& config) {
  const json p = resolve(config.command, config.parameters);
  bool pass = false;
  json body;
  const auto& cmd = config.command;
  if (cmd == "barrier") {
    body = run_barrier(p, config.seed, pass);
  } else if (cmd == "verify-operator") {
    body = run_verify_operator(p, config.seed, pass);
  } else if (cmd == "outward-ball") {
    body = run_outward_ball(p, pass);
  } else if (cmd == "csmp") {
    body = run_csmp(p, pass);
  } else if (cmd == "hopf") {
    body = run_hopf(p, pass);
  } else if (cmd == "case") {
    body = run_case(p, config.seed, pass);
  } else {
    body = run_order(p, pass);
  }
  RunOutcome out;
  out.exit_code = pass ? 0 : 1;
  out.report = {{"command", cmd},
                {"parameters", p},
                {"seed", config.seed},
                {"status", pass ? "pass" : "fail"},
                {"result", std::move(body)}};
  return out;
}

std::string render_report(const nlohmann::json& report) {
  // nlohmann::json objects are std::map-backed, so keys come out sorted.
  return report.dump(2) + "\n";
}

int execute(const RunConfig& config, std::ostream& out, std::ostream& err) {
  RunOutcome outcome;
  try {
    outcome = run(config);
  } catch (const ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    if (schemas().count(config.command)) {
      err << "parameters of '" << config.command << "' (with defaults):\n"
          << command_schema(config.command).dump(2) << "\n";
    } else {
      err << "commands:";
      for (const auto& name : command_names()) err << " " << name;
      err << "\n";
    }
    return 2;
  } catch (const json::exception& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    outcome.exit_code = 1;
    outcome.report = {{"command", config.command},
                      {"seed", config.seed},
                      {"status", "error"},
                      {"error", e.what()}};
  }
  const std::string text = render_report(outcome.report);
  if (config.output) {
    std::ofstream file(*config.output, std::ios::binary);
    if (!file) {
      err << "cannot write report to '" << *config.output << "'\n";
      return 2;
    }
    file << text;
    out << config.command << ": " << outcome.report.at("status").get<std::string>()
        << " (report written to " << *config.output << ")\n";
  } else {
    out << text;
  }
  return outcome.exit_code;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("'" + item + "' is not a number");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw UsageError("'" + item + "' is not a number");
    }
    out.push_back(value);
  }
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

nlohmann::json json_or_file(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    try {
      return json::parse(text);
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("malformed JSON: ") + e.what());
    }
  }
  if (std::filesystem::is_regular_file(text)) {
    std::ifstream in(text);
    try {
      return json::parse(in);
    } catch (const json::parse_error& e) {
      throw UsageError("malformed JSON in '" + text + "': " + e.what());
    }
  }
  return text;
}

}  // namespace bpplab::cli
