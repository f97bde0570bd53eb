#include "reslab/error.hpp"
#include "reslab/types.hpp"

#include <cmath>

namespace reslab {

const char* kind_name(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::NonRepresentableInterface: return "NonRepresentableInterface";
    case ErrorKind::InvalidPotential: return "InvalidPotential";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::NoWell: return "NoWell";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::SingularRobinSystem: return "SingularRobinSystem";
    case ErrorKind::NearDirichletEigenvalue: return "NearDirichletEigenvalue";
    case ErrorKind::BranchCutHit: return "BranchCutHit";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::NearResonance: return "NearResonance";
    case ErrorKind::FactorizationFailure: return "FactorizationFailure";
    case ErrorKind::UnsupportedPotentialAtBoundary: return "UnsupportedPotentialAtBoundary";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::AccretivityProbeFailed: return "AccretivityProbeFailed";
    case ErrorKind::ClusterNotIsolated: return "ClusterNotIsolated";
    case ErrorKind::BiorthogonalityBreakdown: return "BiorthogonalityBreakdown";
    case ErrorKind::StepTooCoarse: return "StepTooCoarse";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

cplx sqrt_branch(cplx z)
{
    if (z == cplx(0.0)) return 0.0;
    double arg = std::arg(z);  // (-pi, pi]
    if (arg < -kPi / 2) arg += 2 * kPi;
    return std::polar(std::sqrt(std::abs(z)), arg / 2);
}

double l2_norm(const CVec& u, double dx)
{
    return std::sqrt(u.squaredNorm() * dx);
}

}  // namespace reslab
