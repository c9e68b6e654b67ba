#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "biothom/macro.hpp"

namespace biothom {

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_config_error = 2, exit_solver_error = 3 };

struct CommandOptions {
  std::string config_path;
  std::optional<std::string> out_dir;  ///< overrides output.dir
  std::optional<CouplingMode> mode;    ///< overrides macro.mode
  bool negative_control = false;
};

/// Each command writes its artifacts, logs to `log`, reports errors on `err`
/// and returns an ExitCode; no exception escapes.
int cmd_cell(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_kernels(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_macro(const CommandOptions& opts, std::ostream& log, std::ostream& err);
int cmd_verify(const CommandOptions& opts, std::ostream& log, std::ostream& err);

}  // namespace biothom
