#pragma once

#include <ostream>

namespace sgdmlab {

// Exit codes: 0 all checks pass, 1 a check failed, 2 usage or config error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sgdmlab
