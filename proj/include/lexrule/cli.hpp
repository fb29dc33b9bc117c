#pragma once

#include <ostream>

namespace lexrule::cli {

/// Process exit codes.
enum Exit : int {
    kOk = 0,          // success, or the goal holds
    kSemantic = 1,    // ERROR diagnostics, unsupported clause shapes, mismatches
    kUsage = 2,       // bad flags, unreadable or malformed input, bind failure
    kNotHolds = 3,    // evaluated fine, goal does not hold
};

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lexrule::cli
