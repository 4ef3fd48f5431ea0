#pragma once

namespace drachma {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,
    kExitNumerical = 3,
    kExitIo = 4,
};

/// Full command-line entry point (subcommands: synth, simulate, shots, sweep,
/// scan-zeta, calibrate).  Returns the process exit code.
int run_cli(int argc, const char* const* argv);

} // namespace drachma
