#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace idid {

/// Dispatch a full command line (without argv[0]). Reports go to `out`,
/// error objects to `err`. Exit codes: 0 success, 1 validation error,
/// 2 estimation failure.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace idid
