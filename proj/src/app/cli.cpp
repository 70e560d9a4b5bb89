#include "lorentzlab/app/cli.hpp"

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "lorentzlab/app/commands.hpp"
#include "lorentzlab/error.hpp"
#include "lorentzlab/parallel.hpp"

namespace lorentzlab::app {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App cli{"Spacelike submanifolds, static graphs and initial data in Lorentzian models", "lorentzlab"};
  cli.require_subcommand(1);
  std::string config_path, out_dir, command;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  for (const auto& name : subcommands()) {
    auto* sub = cli.add_subcommand(name, "run " + name);
    sub->add_option("--config", config_path, "TOML or JSON config")->required();
    sub->add_option("--out", out_dir, "directory for report.json and CSV dumps");
    sub->add_option("--seed", seed, "seed for randomized runs");
    sub->add_option("--threads", threads, "worker threads (default $LORENTZLAB_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    sub->callback([&command, name] { command = name; });
  }
  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "lorentzlab: error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (threads) set_thread_count(*threads);

  CommandResult result;
  try {
    auto config = load_config(config_path);
    RunContext ctx{std::filesystem::path(config_path).parent_path(), seed};
    result = run_command(command, config, ctx);
  } catch (const std::exception& e) {
    result.exit_code = exit_code_for(e);
    result.report = Json{{"schema", "v1"},
                         {"command", command},
                         {"error", Json{{"kind", error_kind(e)}, {"message", e.what()}}},
                         {"exit_code", result.exit_code}};
  }
  if (result.report.contains("error"))
    std::cerr << "lorentzlab: " << result.report["error"]["kind"].get<std::string>()
              << " error: " << result.report["error"]["message"].get<std::string>() << "\n";

  auto text = dump_report(result.report);
  std::cout << text;
  if (!out_dir.empty()) {
    try {
      std::filesystem::create_directories(out_dir);
      write_text(std::filesystem::path(out_dir) / "report.json", text);
      for (const auto& a : result.artifacts) write_text(std::filesystem::path(out_dir) / a.name, a.content);
    } catch (const std::exception& e) {
      std::cerr << "lorentzlab: error: " << e.what() << "\n";
      return kExitConfig;
    }
  }
  return result.exit_code;
}

}  // namespace lorentzlab::app
