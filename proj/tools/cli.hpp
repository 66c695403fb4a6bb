#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pmtc::cli {

// Exit codes.
enum Exit : int {
    ok = 0,
    internal_error = 1,
    invalid_config = 2,  // bad flags, unknown config keys, malformed values
    infeasible_design = 3,
    shape_mismatch = 4,
    unreadable_file = 5,
};

// args excludes the program name.  Summaries go to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pmtc::cli
