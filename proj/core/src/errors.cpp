#include "ssc/errors.hpp"

namespace ssc {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::OffManifold: return "OffManifold";
        case ErrorCode::DenominatorVanishes: return "DenominatorVanishes";
        case ErrorCode::DegenerateTangency: return "DegenerateTangency";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::NotHyperbolic: return "NotHyperbolic";
        case ErrorCode::NoHit: return "NoHit";
        case ErrorCode::StepFailure: return "StepFailure";
        case ErrorCode::LeftSlidingRegion: return "LeftSlidingRegion";
        case ErrorCode::NonUniqueForward: return "NonUniqueForward";
        case ErrorCode::DomainExit: return "DomainExit";
        case ErrorCode::ConnectionResidualTooLarge: return "ConnectionResidualTooLarge";
        case ErrorCode::BackwardDivergence: return "BackwardDivergence";
        case ErrorCode::NotAFocus: return "NotAFocus";
        case ErrorCode::FoldRegularityLost: return "FoldRegularityLost";
        case ErrorCode::CurveEscapesDomain: return "CurveEscapesDomain";
        case ErrorCode::HitOutsideSliding: return "HitOutsideSliding";
        case ErrorCode::SectionMiss: return "SectionMiss";
        case ErrorCode::OutOfChart: return "OutOfChart";
        case ErrorCode::BranchResolutionExceeded: return "BranchResolutionExceeded";
        case ErrorCode::NotSurjective: return "NotSurjective";
        case ErrorCode::NoValidCutoff: return "NoValidCutoff";
        case ErrorCode::LambdaMismatch: return "LambdaMismatch";
        case ErrorCode::ConditionViolated: return "ConditionViolated";
        case ErrorCode::DegenerateSystem: return "DegenerateSystem";
        case ErrorCode::InsufficientMaps: return "InsufficientMaps";
        case ErrorCode::NonMonotone: return "NonMonotone";
        case ErrorCode::TailDiverges: return "TailDiverges";
        case ErrorCode::NoRootInUnitInterval: return "NoRootInUnitInterval";
        case ErrorCode::EquivalenceFailure: return "EquivalenceFailure";
        case ErrorCode::CertificateFailure: return "CertificateFailure";
        case ErrorCode::ParameterInfeasible: return "ParameterInfeasible";
        case ErrorCode::DegenerateFit: return "DegenerateFit";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace ssc
