#ifndef SSM_CLI_HPP
#define SSM_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace ssm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs the `ssm-smc` command line. `args` excludes the program name.
/// Errors go to `err` as lines prefixed "error:"; returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssm::cli

#endif  // SSM_CLI_HPP
