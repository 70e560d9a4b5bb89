// Runs the acceptance battery and prints one pass/fail line per criterion.
// Usage: acceptance [seed] [replay-dir]

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "lorentzlab/app/suite.hpp"

using namespace lorentzlab::app;

int main(int argc, char** argv) {
  SuiteOptions opt;
  if (argc > 1) opt.seed = std::stoull(argv[1]);
  std::filesystem::path replay_dir = argc > 2 ? argv[2] : "acceptance_replay";
  auto outcomes = run_criteria(opt);
  bool all = true;
  for (const auto& o : outcomes) {
    all = all && o.passed;
    std::cout << "criterion " << o.id << " " << (o.passed ? "PASS" : "FAIL") << " " << o.name << ": " << o.summary
              << "\n";
    for (std::size_t k = 0; k < o.replay.size(); ++k) {
      std::filesystem::create_directories(replay_dir);
      auto path = replay_dir / ("c" + std::to_string(o.id) + "_" + std::to_string(k) + "." + o.replay[k].command + ".json");
      std::ofstream(path) << dump_report(o.replay[k].config);
      if (k < 3) std::cout << "  replay: lorentzlab " << o.replay[k].command << " --config " << path.string() << "\n";
    }
    if (o.replay.size() > 3) std::cout << "  (" << o.replay.size() << " replay configs in " << replay_dir.string() << ")\n";
  }
  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
