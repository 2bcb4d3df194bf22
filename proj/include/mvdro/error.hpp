#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvdro {

enum class ErrorCode {
    // market data
    MalformedFile,
    NonPositivePrice,
    NonMonotoneDates,
    TooFewRows,
    HorizonTooLong,
    // encoding
    UnsupportedOrder,
    IndexOutOfRange,
    DimensionMismatch,
    HistoryTooShort,
    MaskViolation,
    // calibration
    TooFewSamples,
    SingularKKT,
    DegenerateDenominator,
    ZeroMultiplier,
    ZeroNorm,
    ZeroRadius,
    InvalidArgument,
    // robust optimizer
    NegativeQuadForm,
    InfeasibleLambda,
    InfeasibleProblem,
    NonConvergence,
    // baselines
    SingularCovariance,
    CycleDetected,
    SingularAdjustedCovariance,
    InfeasibleTarget,
    // backtest
    WindowExhausted,
    DivisionByZeroWeight,
    // reporting
    ZeroVolatility,
    SeriesTooShort,
    IoError,
    ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code. All library failures surface as this type.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace mvdro
