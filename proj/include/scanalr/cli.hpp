#pragma once

#include <iosfwd>

namespace scanalr {

/// Entry point of the `scanalr` tool (`analyze` and `simulate`).
/// Returns the process exit status: 0 on success, 2 for invalid input or
/// flags, 3 when a numerical procedure fails, 1 otherwise.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scanalr
