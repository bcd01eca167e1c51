#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xbar::cli {

enum ExitCode : int {
    ok = 0,
    parity_failed = 1,  // compare ran but a tolerance was exceeded
    user_error = 2,
    internal_error = 3,
};

/// Entry point behind the xbarc binary. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xbar::cli
