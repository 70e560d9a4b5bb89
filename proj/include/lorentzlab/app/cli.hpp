#pragma once

namespace lorentzlab::app {

/// `<tool> <subcommand> --config <path> [--out <dir>] [--seed <u64>]
/// [--threads <k>]`. Prints the JSON report on stdout, writes report.json and
/// CSV dumps under --out, diagnostics on stderr. Returns the exit code.
int run_cli(int argc, char** argv);

}  // namespace lorentzlab::app
