#include "saddlesmith/errors.hpp"

namespace saddlesmith {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::ZeroConstantTerm: return "ZeroConstantTerm";
        case ErrorKind::TruncationTooLow: return "TruncationTooLow";
        case ErrorKind::NonvanishingTimeGerm: return "NonvanishingTimeGerm";
        case ErrorKind::NotResonantSaddle: return "NotResonantSaddle";
        case ErrorKind::ResonantOrderExceedsTruncation: return "ResonantOrderExceedsTruncation";
        case ErrorKind::ObstructedMonomial: return "ObstructedMonomial";
        case ErrorKind::ZeroInput: return "ZeroInput";
        case ErrorKind::BadOffset: return "BadOffset";
        case ErrorKind::OutOfSector: return "OutOfSector";
        case ErrorKind::NotAdapted: return "NotAdapted";
        case ErrorKind::EvalOnContour: return "EvalOnContour";
        case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
        case ErrorKind::NotInUnitBall: return "NotInUnitBall";
        case ErrorKind::TwistSearchFailed: return "TwistSearchFailed";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::GluingResidualTooLarge: return "GluingResidualTooLarge";
        case ErrorKind::DegreeFitResidualTooLarge: return "DegreeFitResidualTooLarge";
        case ErrorKind::FitResidualTooLarge: return "FitResidualTooLarge";
        case ErrorKind::LeftSector: return "LeftSector";
        case ErrorKind::ObstructedIntegrand: return "ObstructedIntegrand";
        case ErrorKind::TailNotConverged: return "TailNotConverged";
        case ErrorKind::HNotAttained: return "HNotAttained";
        case ErrorKind::ParseError: return "ParseError";
    }
    return "UnknownError";
}

int error_kind_exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::NotResonantSaddle:
        case ErrorKind::ResonantOrderExceedsTruncation:
            return 2;
        case ErrorKind::ParseError:
            return 3;
        case ErrorKind::NoConvergence:
        case ErrorKind::TwistSearchFailed:
        case ErrorKind::NotAdapted:
        case ErrorKind::GluingResidualTooLarge:
        case ErrorKind::DegreeFitResidualTooLarge:
        case ErrorKind::FitResidualTooLarge:
            return 4;
        case ErrorKind::ObstructedMonomial:
        case ErrorKind::ObstructedIntegrand:
            return 5;
        default:
            return 4;
    }
}

} // namespace saddlesmith
