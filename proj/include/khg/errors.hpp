#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace khg {

/// Every failure the library reports carries one of these codes.
enum class ErrorCode {
    InvalidPartition,
    MismatchedN,
    ZeroNilpotent,
    NotNilpotent,
    DimensionMismatch,
    StratumViolation,
    NewtonDiverged,
    IdenticallyZeroWedge,
    DomainError,
    DomainTouchesSingularity,
    LengthMismatch,
    LinearSolveFailed,
    CollisionDetected,
    ArcsNotDisjoint,
    InvalidBraid,
    NotPureBraid,
    SingularJacobian,
    Diverged,
    StepUnderflow,
    NoSamplesConverged,
    IndeterminateConvergence,
    InsufficientSeeds,
    ConfigError,
    IoError,
};

/// Coarse classes, one CLI exit code each.
enum class ErrorClass { Config, Numerical, Precondition };

constexpr ErrorClass error_class(ErrorCode code) {
    switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
        return ErrorClass::Config;
    case ErrorCode::NewtonDiverged:
    case ErrorCode::LinearSolveFailed:
    case ErrorCode::SingularJacobian:
    case ErrorCode::Diverged:
    case ErrorCode::StepUnderflow:
    case ErrorCode::NoSamplesConverged:
    case ErrorCode::IndeterminateConvergence:
    case ErrorCode::InsufficientSeeds:
        return ErrorClass::Numerical;
    default:
        return ErrorClass::Precondition;
    }
}

constexpr int exit_code(ErrorClass c) {
    switch (c) {
    case ErrorClass::Config: return 2;
    case ErrorClass::Numerical: return 3;
    case ErrorClass::Precondition: return 4;
    }
    return 1;
}

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorClass error_class() const noexcept { return khg::error_class(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) fail(code, what);
}

} // namespace khg
