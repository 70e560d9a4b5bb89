#pragma once

// Subcommand dispatch: config tree in, JSON report (schema v1), CSV dumps and
// an exit code out.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lorentzlab/app/config.hpp"

namespace lorentzlab::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCriterionFailed = 1;
inline constexpr int kExitHypothesis = 2;
inline constexpr int kExitNonconvergent = 3;
inline constexpr int kExitConfig = 4;

inline constexpr std::uint64_t kDefaultSeed = 1;

struct RunContext {
  /// Relative grid files resolve against this directory.
  std::filesystem::path config_dir;
  /// Overrides the config seed.
  std::optional<std::uint64_t> seed;
};

struct Artifact {
  std::string name;
  std::string content;
};

struct CommandResult {
  Json report;
  int exit_code = kExitOk;
  std::vector<Artifact> artifacts;
};

const std::vector<std::string>& subcommands();

/// Validates the config, runs the subcommand and maps library errors to exit
/// codes. The report always carries "schema": "v1" and the command name.
CommandResult run_command(std::string_view command, const Json& config, const RunContext& context);

/// Exit code for an exception escaping a computation.
int exit_code_for(const std::exception& e);
std::string error_kind(const std::exception& e);

/// Report serialization used by the CLI and the acceptance suite.
std::string dump_report(const Json& report);

}  // namespace lorentzlab::app
