#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace veesa::cli {

/// Runs one command. Returns 0 on success, 2 on usage errors, 1 on
/// runtime errors. Diagnostics go to `err`; artifacts go to files only.
int run(const std::vector<std::string>& args, std::ostream& err);

}  // namespace veesa::cli
