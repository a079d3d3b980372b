// SPDX-License-Identifier: Apache-2.0
#include "linearcredit/errors.hpp"

namespace linearcredit {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidInput: return "invalid_input";
    case ErrorKind::Constraint: return "constraint";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Capacity: return "capacity";
    case ErrorKind::DegenerateAnnuity: return "degenerate_annuity";
    case ErrorKind::DegenerateSupport: return "degenerate_support";
    case ErrorKind::EmptyPortfolio: return "empty_portfolio";
    case ErrorKind::Calibration: return "calibration_failure";
    case ErrorKind::Unsupported: return "unsupported";
    }
    return "unknown";
}

void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace linearcredit
