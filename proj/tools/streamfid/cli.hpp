#pragma once

#include <ostream>

namespace streamfid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;  // unreadable or malformed input, inconsistent data
inline constexpr int kExitUsage = 2;  // flag validation failure

// Parses argv and runs one command. Reports go to the -o path, or to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace streamfid::cli
