#pragma once

// Command-line front end. Exit codes: 0 ran with a true verdict, 3 ran with a
// false verdict, 1 library error, 2 usage error.

#include <ostream>
#include <string>
#include <vector>

namespace reldiff::cli {

inline constexpr int exit_true = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_usage = 2;
inline constexpr int exit_false = 3;

/// `args` excludes the program name.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reldiff::cli
