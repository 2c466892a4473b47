#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace advtext::cli {

// Runs one command line; `args` excludes the program name. Subcommands:
// ingest, train, attack, metrics, transfer, defend, study-build,
// study-serve, report, oracle-serve. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Config keys of every subcommand, for documentation and tests.
std::vector<std::string> command_names();

}  // namespace advtext::cli
