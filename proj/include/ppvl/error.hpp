#pragma once

#include <stdexcept>
#include <string>

namespace ppvl {

enum class ErrorCode {
    InvalidArgument = 1,
    StepSizeUnderflow,
    DivisionByZero,
    PoleAtDenominator,
    NotExists,
    Io,
};

const char *to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Numerical failures (as opposed to invalid input) that callers may choose to
// record per cell instead of aborting a scan.
inline bool is_numerical(ErrorCode code) noexcept
{
    return code == ErrorCode::StepSizeUnderflow || code == ErrorCode::DivisionByZero ||
           code == ErrorCode::PoleAtDenominator;
}

[[noreturn]] inline void fail(ErrorCode code, const std::string &what)
{
    throw Error(code, what);
}

} // namespace ppvl
