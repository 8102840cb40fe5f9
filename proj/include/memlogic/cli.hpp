#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace memlogic {

/// Exit codes: 0 clean run, 1 logical failures or experiment errors, 2 usage
/// or configuration errors.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailures = 1;
inline constexpr int kExitUsage = 2;

/// Output directory override read when --out is not given.
inline constexpr const char* kOutDirEnv = "MEMLOGIC_OUT_DIR";

/// Runs one invocation. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace memlogic
