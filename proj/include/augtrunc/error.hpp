#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace augtrunc {

enum class ErrorCode {
    InvalidParams,
    InvalidConfig,
    NegativeDeficit,
    SingularComplement,
    NoClosedClass,
    MultipleClosedClasses,
    SingularSystem,
    NumericalFailure,
    RouteMismatch,
    ZeroRate,
    NotSingleBirth,
    NotSingleDeath,
    NotBirthDeath,
    TailNotConverged,
    NotConverged,
    CapExceeded,
    TooFewRows,
};

std::string_view to_string(ErrorCode code);

/// All library failures are reported through this type; the code drives the
/// CLI exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// True for problems with user input rather than with the numerics.
    bool is_config_error() const noexcept {
        return code_ == ErrorCode::InvalidParams || code_ == ErrorCode::InvalidConfig;
    }

private:
    ErrorCode code_;
};

}  // namespace augtrunc
