#pragma once
// Command-line front end: load-check, synthesize, answer, eval, attack.

#include <iosfwd>
#include <string>
#include <vector>

namespace targa {

/// Runs the command line `args` (without the program name). Returns the
/// process exit code: 0 on success, 1 when any evaluated item hard-failed,
/// 2 on usage, configuration or input errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace targa
