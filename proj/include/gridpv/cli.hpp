#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gridpv {

inline constexpr int kExitOk = 0;
inline constexpr int kExitScenarioFailed = 1;
inline constexpr int kExitConfigError = 2;

/// `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

} // namespace gridpv
