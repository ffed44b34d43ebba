#pragma once

#include <ostream>

namespace cogspan::cli {

/// Entry point of the `cogspan` tool. Returns the process exit code; on
/// failure a JSON object {"error": {"kind", "message"}} goes to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cogspan::cli
