#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>

namespace {

using bpplab::cli::RunConfig;
using json = nlohmann::json;

enum class Kind { kInt, kNumber, kString, kList, kPair };

struct Flag {
  std::string name;  // command-line spelling without dashes
  std::string key;   // parameter key
  Kind kind;
  std::string help;
};

json convert(const Flag& f, const std::string& text) {
  switch (f.kind) {
    case Kind::kInt: {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != text.size()) throw bpplab::cli::UsageError("--" + f.name + " expects an integer");
      return v;
    }
    case Kind::kNumber: {
      const auto v = bpplab::cli::parse_number_list(text);
      if (v.size() != 1) throw bpplab::cli::UsageError("--" + f.name + " expects one number");
      return v[0];
    }
    case Kind::kString: return text;
    case Kind::kList: return bpplab::cli::parse_number_list(text);
    case Kind::kPair: {
      const auto v = bpplab::cli::parse_number_list(text);
      if (v.size() != 2) throw bpplab::cli::UsageError("--" + f.name + " expects lower,upper");
      return json{{"lower", v[0]}, {"upper", v[1]}};
    }
  }
  return nullptr;
}

const std::map<std::string, std::vector<Flag>>& flags() {
  static const Flag n{"n", "n", Kind::kInt, "dimension"};
  static const Flag weight{"weight", "weight", Kind::kString,
                           "constant:<v> | power:<c>,<alpha> | file:<csv>"};
  static const Flag coeffs{"coeffs", "coeffs", Kind::kString,
                           "family name, JSON object or JSON file"};
  static const Flag grid{"grid", "grid", Kind::kString, "grid JSON object or file"};
  static const Flag boundary{"boundary", "boundary", Kind::kPair,
                             "boundary values at the two ends of the first axis: lower,upper"};
  static const Flag csv{"csv", "csv", Kind::kString, "write the solved field as CSV"};
  static const std::map<std::string, std::vector<Flag>> f = {
      {"barrier",
       {n, {"R", "R", Kind::kNumber, "outer radius"}, {"m", "m", Kind::kNumber, "height"},
        {"eps", "eps", Kind::kNumber, "annulus width (default: admissible)"}, weight, coeffs,
        {"samples", "samples", Kind::kInt, "residual samples"}}},
      {"verify-operator",
       {n, {"R", "R", Kind::kNumber, "ball radius"}, weight, coeffs,
        {"samples", "samples", Kind::kInt, "growth samples"}}},
      {"outward-ball",
       {{"scene", "scene", Kind::kString, "preset name, JSON object or JSON file"},
        {"resolutions", "h", Kind::kList, "grid spacings h"},
        {"expect", "expect", Kind::kString, "found | falsified"}}},
      {"csmp", {grid, weight, coeffs, boundary, csv}},
      {"hopf",
       {grid, weight, coeffs, boundary, csv,
        {"hseq", "hseq", Kind::kList, "step sequence, coarse to fine"},
        {"x-b", "x_b", Kind::kList, "boundary point"},
        {"nu", "nu", Kind::kList, "outward normal"}}},
      {"case", {{"budget", "budget", Kind::kInt, "interior samples"}}},
      {"order",
       {{"kappa", "kappa", Kind::kNumber, "ball-chain ratio"},
        {"theta", "theta", Kind::kNumber, "cone half-angle (alternative to kappa)"},
        {"C", "C", Kind::kNumber, "weak Harnack constant"}, n}},
  };
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for boundary point principles"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  std::string config_path, json_out;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "run configuration JSON file");
  auto* json_opt = app.add_option("--json", json_out, "write the report to this path");
  auto* seed_opt = app.add_option("--seed", seed, "sampling seed (default 0)");

  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::map<std::string, CLI::Option*>> options;
  std::string case_id;
  for (const auto& [command, list] : flags()) {
    auto* sub = app.add_subcommand(command);
    for (const auto& flag : list) {
      options[command][flag.name] =
          sub->add_option("--" + flag.name, values[command][flag.name], flag.help);
    }
    if (command == "case") sub->add_option("id", case_id, "ex2_9 | ex2_12 | ex3_2 | ex3_4");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  RunConfig config;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw bpplab::cli::UsageError("cannot read config '" + config_path + "'");
      config = RunConfig::from_json(json::parse(in));
    }
    const auto subs = app.get_subcommands();
    if (!subs.empty()) {
      const std::string command = subs.front()->get_name();
      if (!config.command.empty() && config.command != command) {
        config.parameters = json::object();
      }
      config.command = command;
      for (const auto& flag : flags().at(command)) {
        if (options[command][flag.name]->count() > 0) {
          config.parameters[flag.key] = convert(flag, values[command][flag.name]);
        }
      }
      if (command == "case" && !case_id.empty()) config.parameters["id"] = case_id;
    }
    if (config.command.empty()) {
      throw bpplab::cli::UsageError("no command given (use --help)");
    }
    if (json_opt->count() > 0) config.output = json_out;
    if (seed_opt->count() > 0) config.seed = seed;
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  return bpplab::cli::execute(config, std::cout, std::cerr);
}
