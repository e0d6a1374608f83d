#pragma once

#include <optional>
#include <ostream>
#include <string_view>

#include "config.hpp"

namespace ggflow::cli {

enum class Command { Solve, Flow, Classify, Sweep, Lemmas };

std::optional<Command> parse_command(std::string_view s);
std::string_view to_string(Command c);

/// Runs one subcommand and writes its artifacts plus manifest.json into
/// cfg.output_dir. Returns the process exit status: 0 on success, 1 on a
/// numerical failure (artifacts written so far are kept), 2 on a usage
/// problem. Progress lines go to `log`.
int execute(Command cmd, const ExperimentConfig& cfg, std::ostream& log);

}  // namespace ggflow::cli
