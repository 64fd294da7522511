#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace topictrace::cli {

// Exit codes: 0 success, 1 internal error, 2 usage or input validation.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;

// Entry point shared by the topictrace binary and the tests. args[0] is the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace topictrace::cli
