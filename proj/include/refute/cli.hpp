#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "refute/data.hpp"

namespace refute {

// Exit codes: 0 success, 1 usage, 2 data or configuration error, 3 weak identification.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitWeakId = 3;

// args excludes the program name. The JSON (or table) report goes to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Dotted-path plaintext rendering of a report.
std::string render_table(const json& report);

}  // namespace refute
