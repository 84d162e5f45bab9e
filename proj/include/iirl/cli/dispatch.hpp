#pragma once

#include <ostream>

namespace iirl::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Runs one subcommand. Returns 0 on success, 1 on a domain error and 2 on
/// a usage error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace iirl::cli
