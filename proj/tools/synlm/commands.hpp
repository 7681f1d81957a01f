#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace synlm::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalError = 3 };

/// Environment variable that overrides the data root used to resolve
/// relative input paths.
inline constexpr const char* kDataRootEnv = "SYNLM_DATA_ROOT";

/// Runs the tool on `args` (without the program name), writing to the given
/// streams. Never throws; failures become exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main_entry(int argc, char** argv);

}  // namespace synlm::cli
