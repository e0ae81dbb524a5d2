#pragma once

#include <iosfwd>

#include "ubranch/config.hpp"

namespace ubranch::cli {

enum ExitCode : int {
  kPass = 0,
  kFail = 1,
  kConfigError = 2,
  kIndeterminate = 3,
  kIoError = 4,
};

/// Runs the experiment named by config.experiment, writes the requested CSV/JSON outputs and
/// prints one verdict line per experiment to `out`. Returns the exit status.
int run(const RunConfig& config, std::ostream& out);

/// Full command line: subcommand, --config FILE, per-key flags. Errors go to `err`.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ubranch::cli
