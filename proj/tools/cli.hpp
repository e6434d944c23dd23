#pragma once

#include <iosfwd>

namespace cotg::cli {

/// Entry point of the `cotg` tool. Returns the process exit code; `log`
/// receives diagnostics and the human-readable tables.
int run(int argc, const char* const* argv, std::ostream& log);

}  // namespace cotg::cli
