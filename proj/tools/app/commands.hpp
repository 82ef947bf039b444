#pragma once

#include <iosfwd>

#include "run_config.hpp"

namespace optinstall::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

// Each command writes its artifacts under config.output_dir and throws
// InputError / NumericalError on failure.
void cmd_estimate(const RunConfig& config, std::ostream& log);
void cmd_boundary(const RunConfig& config, std::ostream& log);
void cmd_simulate(const RunConfig& config, std::ostream& log);
void cmd_compare(const RunConfig& config, std::ostream& log);
void cmd_psi_dump(const RunConfig& config, std::ostream& log);

/// Full command line: parses, dispatches, maps errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace optinstall::app
