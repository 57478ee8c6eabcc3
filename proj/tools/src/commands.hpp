#ifndef REP_CLI_COMMANDS_HPP
#define REP_CLI_COMMANDS_HPP

#include "config.hpp"

namespace rep::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitTheory = 4;
inline constexpr int kExitNoEvent = 5;

int cmd_simulate(const RunConfig& cfg);
int cmd_blowup(const RunConfig& cfg);
int cmd_classify(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg);
int cmd_verify_example(const RunConfig& cfg);
int cmd_rates(const RunConfig& cfg);

// Dispatch on cfg.mode with the error-to-exit-code mapping applied.
int run_command(const RunConfig& cfg);

// Full argv entry point (subcommand parsing included).
int main_cli(int argc, const char* const* argv);

}  // namespace rep::cli

#endif
