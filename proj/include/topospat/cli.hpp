#ifndef TOPOSPAT_CLI_HPP
#define TOPOSPAT_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace topospat::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Run the command line tool. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace topospat::cli

#endif
