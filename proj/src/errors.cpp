#include "khg/errors.hpp"

namespace khg {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::MismatchedN: return "MismatchedN";
    case ErrorCode::ZeroNilpotent: return "ZeroNilpotent";
    case ErrorCode::NotNilpotent: return "NotNilpotent";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::StratumViolation: return "StratumViolation";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::IdenticallyZeroWedge: return "IdenticallyZeroWedge";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DomainTouchesSingularity: return "DomainTouchesSingularity";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::LinearSolveFailed: return "LinearSolveFailed";
    case ErrorCode::CollisionDetected: return "CollisionDetected";
    case ErrorCode::ArcsNotDisjoint: return "ArcsNotDisjoint";
    case ErrorCode::InvalidBraid: return "InvalidBraid";
    case ErrorCode::NotPureBraid: return "NotPureBraid";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::NoSamplesConverged: return "NoSamplesConverged";
    case ErrorCode::IndeterminateConvergence: return "IndeterminateConvergence";
    case ErrorCode::InsufficientSeeds: return "InsufficientSeeds";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace khg
