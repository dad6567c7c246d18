#pragma once

#include <ostream>

namespace afnet::cli {

/// The `afnet` command line. Returns the process exit status: 0 on success,
/// 1 when gradcheck reports a failure, 2 on any error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace afnet::cli
