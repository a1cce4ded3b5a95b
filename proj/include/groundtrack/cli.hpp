#pragma once

#include <iostream>

namespace groundtrack {

/// Command-line entry point. Subcommands: simulate, track, eval, report, bench.
/// Returns 0 on success, 2 on usage errors and 1 on I/O or data errors.
int cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace groundtrack
