// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace linearcredit {

/// Failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
    InvalidInput,
    Constraint,
    Domain,
    Capacity,
    DegenerateAnnuity,
    DegenerateSupport,
    EmptyPortfolio,
    Calibration,
    Unsupported,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition)
        fail(kind, what);
}

}  // namespace linearcredit
