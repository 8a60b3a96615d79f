#pragma once

namespace vsir::cli {

/// Runs one `vsir` subcommand. Returns 0 on success, 2 for usage and
/// configuration errors and 1 for everything else. Diagnostics go to stderr.
int dispatch(int argc, const char* const* argv);

}  // namespace vsir::cli
