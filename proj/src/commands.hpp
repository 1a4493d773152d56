// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace lapkit
{

// Process exit codes shared by the CLI and the C API.
enum ExitCode : int
{
  kExitOk = 0,
  kExitUsage = 1,      // parse errors, bad arguments
  kExitUnbounded = 2,  // validate: some functional unbounded
  kExitVerdict = 3,    // a verdict failed
  kExitSolver = 4      // solver failure
};

const std::vector<std::string> &command_names();

// Runs one command, writing CSVs and config.echo into out_dir and a short
// human-readable log to `log`. Errors are mapped onto exit codes.
int run_command(const std::string &name, const Config &cfg, const std::string &out_dir,
                std::ostream &log);

// RFC-4180 style helpers, 17 significant digits for reals.
std::string csv_real(double x);
std::string csv_field(const std::string &s);

}  // namespace lapkit
