// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace linearcredit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitCapacity = 3;

/// Parses argv, runs one subcommand and writes its JSON result to `out`.
/// Errors go to `err` as JSON.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace linearcredit::cli
