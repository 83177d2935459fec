#ifndef SADDLESMITH_ERRORS_HPP
#define SADDLESMITH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace saddlesmith {

enum class ErrorKind {
    ZeroConstantTerm,
    TruncationTooLow,
    NonvanishingTimeGerm,
    NotResonantSaddle,
    ResonantOrderExceedsTruncation,
    ObstructedMonomial,
    ZeroInput,
    BadOffset,
    OutOfSector,
    NotAdapted,
    EvalOnContour,
    QuadratureNotConverged,
    NotInUnitBall,
    TwistSearchFailed,
    NoConvergence,
    GluingResidualTooLarge,
    DegreeFitResidualTooLarge,
    FitResidualTooLarge,
    LeftSector,
    ObstructedIntegrand,
    TailNotConverged,
    HNotAttained,
    ParseError,
};

const char* error_kind_name(ErrorKind k);

// Exit-code classes used by the CLI: 2 classification, 3 parse, 4 realization, 5 obstruction.
int error_kind_exit_code(ErrorKind k);

class SaddleError : public std::runtime_error {
public:
    SaddleError(ErrorKind kind, const std::string& msg)
        : std::runtime_error(std::string(error_kind_name(kind)) + ": " + msg), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
    throw SaddleError(kind, msg);
}

} // namespace saddlesmith

#endif
