#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "mvclt/identities.hpp"
#include "mvclt_cli/config.hpp"

namespace mvclt::cli {

enum ExitCode : int { kOk = 0, kCheckFailure = 1, kConfigError = 2, kHypothesisViolation = 3 };

struct CliOptions {
  std::string command;  // check-identities | bound | sweep | compare-runs
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> out;
  std::optional<std::string> svg;
  bool reproducible = false;
  bool strict = false;
};

/// Test seams. Production callers leave these empty.
struct CommandHooks {
  OperatorOverrides identity_overrides;
};

/// Loads the config (or uses defaults), applies flag overrides and runs the
/// command. CSV goes to --out, the config's output.csv, or `out`.
int run(const CliOptions& opts, std::ostream& out, std::ostream& err, const CommandHooks& hooks = {});

/// Same with an already parsed config.
int run_with_config(RunConfig cfg, const CliOptions& opts, std::ostream& out, std::ostream& err,
                    const CommandHooks& hooks = {});

}  // namespace mvclt::cli
