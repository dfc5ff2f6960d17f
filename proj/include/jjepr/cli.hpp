#pragma once

// The jjepr command line: subcommands, strict JSON run configuration with
// flag overrides, and the mapping from error categories to exit codes.

#include <string>
#include <vector>

#include "json.hpp"

namespace jjepr::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kValidationError = 3,
  kNumericalError = 4,
  kIoError = 5,
};

/// Subcommand names in help order.
const std::vector<std::string>& commands();

/// Fully populated default configuration of a subcommand.
nlohmann::json default_config(const std::string& command);

/// Overlays `overrides` on `base`. Every key must already exist in `base` with
/// a compatible type; throws ConfigError naming the offending dotted path.
void merge_strict(nlohmann::json& base, const nlohmann::json& overrides, const std::string& path = "");

/// "a.b.c=value" as {"a": {"b": {"c": value}}}; the value is parsed as JSON
/// and falls back to a plain string.
nlohmann::json parse_assignment(const std::string& assignment);

/// argv[0] is the program name. Writes result files, prints a JSON summary on
/// stdout and a JSON error record on stderr.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace jjepr::cli
