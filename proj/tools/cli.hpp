#pragma once

#include <iosfwd>

namespace trajfill::cli {

// Exit codes: 0 success, 1 failure, 2 usage error or missing input.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace trajfill::cli
