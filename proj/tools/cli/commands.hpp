#pragma once

#include "bpplab/error.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bpplab::cli {

// One invocation: a command, its parameters and where the report goes.
// Parameters are validated per command; unknown keys are usage errors.
struct RunConfig {
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  std::optional<std::string> output;
  std::uint64_t seed = 0;

  // {"command": ..., "parameters": {...}, "output": ..., "seed": ...}
  static RunConfig from_json(const nlohmann::json& j);
};

class UsageError : public ParseError {
 public:
  using ParseError::ParseError;
};

struct RunOutcome {
  int exit_code = 0;  // 0 pass, 1 verification failure, 2 usage error
  nlohmann::json report;
};

const std::vector<std::string>& command_names();
// Accepted parameters with their defaults, for usage messages.
nlohmann::json command_schema(const std::string& command);

RunOutcome run(const RunConfig& config);

// Canonical serialisation: sorted keys, two-space indent, trailing newline.
std::string render_report(const nlohmann::json& report);

// run() plus report output: to config.output when set (with a one-line
// status on `out`), otherwise the report itself on `out`. Usage errors go
// to `err` together with the command schema.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

// Helpers shared with the argument parser.
std::vector<double> parse_number_list(const std::string& text);
// A JSON literal if the text starts with '{' or '[', else the contents of
// the named file if it exists, else the plain string.
nlohmann::json json_or_file(const std::string& text);

}  // namespace bpplab::cli
