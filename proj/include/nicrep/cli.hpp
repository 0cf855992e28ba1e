#pragma once

namespace nicrep {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitRuntime = 1,
    kExitUsage = 2,
    kExitViolation = 3,
    kExitUnchecked = 4,
};

int cli_main(int argc, char** argv);

}  // namespace nicrep
