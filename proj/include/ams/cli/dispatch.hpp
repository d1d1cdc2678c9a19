#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ams::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumeric = 2;

/// Entry point of the `ams` tool: train, compare, eval, gradcheck, suite.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int parse_and_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ams::cli
