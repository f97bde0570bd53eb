#pragma once

#include <stdexcept>
#include <string>

namespace reslab {

enum class ErrorKind {
    NonRepresentableInterface,
    InvalidPotential,
    InvalidParameter,
    NoWell,
    DegenerateDenominator,
    SingularRobinSystem,
    NearDirichletEigenvalue,
    BranchCutHit,
    EmptyWindow,
    NewtonDiverged,
    CountMismatch,
    NearResonance,
    FactorizationFailure,
    UnsupportedPotentialAtBoundary,
    ShapeMismatch,
    AccretivityProbeFailed,
    ClusterNotIsolated,
    BiorthogonalityBreakdown,
    StepTooCoarse,
    UnknownKey,
    TypeMismatch,
    ConstraintViolation,
    IoError,
};

const char* kind_name(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

    // configuration problems map to exit code 2, everything else to 3
    bool is_config_error() const
    {
        return kind_ == ErrorKind::UnknownKey || kind_ == ErrorKind::TypeMismatch ||
               kind_ == ErrorKind::ConstraintViolation;
    }

private:
    ErrorKind kind_;
};

}  // namespace reslab
