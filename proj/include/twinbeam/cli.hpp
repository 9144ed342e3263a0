#pragma once

// Command-line front end: moments, reconstruct, simulate, qdii, diagnose.

#include <iosfwd>

namespace twinbeam {

enum ExitCode : int {
    kExitOk = 0,
    kExitInvalid = 2,     // parse or validation error
    kExitInfeasible = 3,  // moments admit no non-negative solution
    kExitNumerical = 4,   // numerical failure
};

/// Runs one command. Reports go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace twinbeam
