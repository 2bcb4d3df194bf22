#include "mvdro/error.hpp"

namespace mvdro {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedFile: return "MalformedFile";
        case ErrorCode::NonPositivePrice: return "NonPositivePrice";
        case ErrorCode::NonMonotoneDates: return "NonMonotoneDates";
        case ErrorCode::TooFewRows: return "TooFewRows";
        case ErrorCode::HorizonTooLong: return "HorizonTooLong";
        case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::HistoryTooShort: return "HistoryTooShort";
        case ErrorCode::MaskViolation: return "MaskViolation";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::SingularKKT: return "SingularKKT";
        case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorCode::ZeroMultiplier: return "ZeroMultiplier";
        case ErrorCode::ZeroNorm: return "ZeroNorm";
        case ErrorCode::ZeroRadius: return "ZeroRadius";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NegativeQuadForm: return "NegativeQuadForm";
        case ErrorCode::InfeasibleLambda: return "InfeasibleLambda";
        case ErrorCode::InfeasibleProblem: return "InfeasibleProblem";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::SingularCovariance: return "SingularCovariance";
        case ErrorCode::CycleDetected: return "CycleDetected";
        case ErrorCode::SingularAdjustedCovariance: return "SingularAdjustedCovariance";
        case ErrorCode::InfeasibleTarget: return "InfeasibleTarget";
        case ErrorCode::WindowExhausted: return "WindowExhausted";
        case ErrorCode::DivisionByZeroWeight: return "DivisionByZeroWeight";
        case ErrorCode::ZeroVolatility: return "ZeroVolatility";
        case ErrorCode::SeriesTooShort: return "SeriesTooShort";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

}  // namespace mvdro
