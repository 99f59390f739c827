#pragma once

#include <iosfwd>

namespace sparse_spike {

/// Exit codes: 0 success, 2 configuration or usage error, 1 runtime error.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace sparse_spike
