// SPDX-License-Identifier: Apache-2.0
#include "simolab/errors.hpp"

namespace simo {

const char* to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::too_large: return "too_large";
    case ErrorCode::singular_input: return "singular_input";
    case ErrorCode::property_violation: return "property_violation";
    case ErrorCode::degenerate_system: return "degenerate_system";
    case ErrorCode::near_zero_symbol: return "near_zero_symbol";
    case ErrorCode::budget_exceeded: return "budget_exceeded";
    case ErrorCode::retry_exhausted: return "retry_exhausted";
    case ErrorCode::io: return "io";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
{
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace simo
