#pragma once

#include <ostream>

namespace genprof::cli {

enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,   // oracle-check found a mismatch
    kInputError = 2,
    kNotConverged = 3,
};

/// Entry point behind the `genprof` executable; exposed so tests can drive
/// subcommands in-process.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace genprof::cli
