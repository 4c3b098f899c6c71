#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssc {

/// Every failure the library reports carries one of these codes so callers
/// (and the CLI exit-code mapping) can dispatch without parsing messages.
enum class ErrorCode {
    // expressions
    SyntaxError,
    UnknownIdentifier,
    NonFinite,
    // filippov
    OffManifold,
    DenominatorVanishes,
    DegenerateTangency,
    NoConvergence,
    NotHyperbolic,
    NoHit,
    StepFailure,
    LeftSlidingRegion,
    NonUniqueForward,
    DomainExit,
    // returnmap
    ConnectionResidualTooLarge,
    BackwardDivergence,
    NotAFocus,
    FoldRegularityLost,
    CurveEscapesDomain,
    HitOutsideSliding,
    SectionMiss,
    OutOfChart,
    BranchResolutionExceeded,
    NotSurjective,
    NoValidCutoff,
    LambdaMismatch,
    // cifs
    ConditionViolated,
    DegenerateSystem,
    InsufficientMaps,
    NonMonotone,
    TailDiverges,
    NoRootInUnitInterval,
    EquivalenceFailure,
    CertificateFailure,
    ParameterInfeasible,
    // oracle
    DegenerateFit,
    // configuration
    ConfigError,
};

[[nodiscard]] const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Parse failure; `offset` is the byte offset into the source text.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, const std::string& what)
        : Error(ErrorCode::SyntaxError, what + " at offset " + std::to_string(offset)),
          offset_(offset) {}

    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace ssc
