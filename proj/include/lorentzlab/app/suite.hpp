#pragma once

// Acceptance battery. Every case is a subcommand config run through
// run_command, so a failing case is replayed with the CLI as is.

#include <cstdint>
#include <string>
#include <vector>

#include "lorentzlab/app/commands.hpp"

namespace lorentzlab::app {

struct ReplayCase {
  std::string command;
  Json config;
};

struct CriterionOutcome {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string summary;
  Json detail;
  std::vector<ReplayCase> replay;
};

struct SuiteOptions {
  std::uint64_t seed = kDefaultSeed;
  std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13};
  std::vector<std::size_t> determinism_threads{1, 2, 8};
};

inline constexpr int kCriterionCount = 13;

std::vector<CriterionOutcome> run_criteria(const SuiteOptions& options);

Json outcome_json(const CriterionOutcome& outcome);

/// The `suite` subcommand: [suite] criteria, determinism_threads; seed.
CommandResult run_suite_command(Section top, const RunContext& context);

}  // namespace lorentzlab::app
