#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cllb::cli {

/// Exit codes: 0 success, 1 usage, 2 validation, 3 numerical.
///
/// args excludes the program name; args[0] is the subcommand
/// (constants | cov-verify | sample | smallball | lil).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace cllb::cli
