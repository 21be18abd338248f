#pragma once

#include <iosfwd>

namespace qkica::tools {

// Exit codes: 0 ok, 1 invalid input or config, 2 numerical failure,
// 3 failed acceptance check in bench mode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace qkica::tools
