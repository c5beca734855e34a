#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace bgdsa {

/// Invocation of one CLI command: the config file plus the flag overrides.
/// Flags win over the corresponding config keys ([run] seed, [run] reps,
/// [output] dir).
struct CommandOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<std::string> out_dir;
};

/// Each command loads the config, resolves the referenced artifacts, writes
/// its reports under the output directory, and returns a process exit code:
/// 0 on success, 1 on an expected negative outcome (infeasible design,
/// diverged simulation). Malformed configs and I/O failures throw.
int cmd_design(const CommandOptions& options);
int cmd_simulate(const CommandOptions& options);
int cmd_rate(const CommandOptions& options);
int cmd_analyze(const CommandOptions& options);

}  // namespace bgdsa
