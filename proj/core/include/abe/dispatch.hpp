#pragma once

#include <iosfwd>
#include <string_view>

#include "abe/config.hpp"

namespace abe {

enum class Subcommand { sweep, single, smatrix, fringe, leakage, validate };

Subcommand parse_subcommand(std::string_view name);
std::string_view to_string(Subcommand sub);

/// Runs one subcommand and writes its artifacts under cfg.output.directory.
/// Returns the process exit status: 0 on success, or the failure-class code
/// when the run completed but its own checks did not hold (3 for a sweep
/// point under its floor, 5 for a failed identity). Errors that stop the run
/// propagate as abe::Error.
int dispatch(Subcommand sub, const RunConfig& cfg, std::ostream& log);

}  // namespace abe
