// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace simo {

enum class ErrorCode {
    invalid_argument,
    dimension_mismatch,
    too_large,
    singular_input,
    property_violation,
    degenerate_system,
    near_zero_symbol,
    budget_exceeded,
    retry_exhausted,
    io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool cond, ErrorCode code, const char* what)
{
    if (!cond) fail(code, what);
}

} // namespace simo
