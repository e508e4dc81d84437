#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace saddle3 {

// Exit codes: 0 success, 1 solver non-convergence, 2 usage or hypothesis error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNotConverged = 1;
inline constexpr int kExitUsage = 2;

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace saddle3
