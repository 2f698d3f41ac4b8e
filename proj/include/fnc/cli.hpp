#pragma once

#include <ostream>

namespace fnc::cli {

/// Entry point of the `fnc` tool. Returns 0 on success, 1 on usage errors
/// and 2 when the input data is unusable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fnc::cli
