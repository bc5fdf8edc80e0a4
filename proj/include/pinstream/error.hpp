#ifndef PINSTREAM_ERROR_HPP
#define PINSTREAM_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace pinstream {

enum class ErrorCode {
    DegenerateQuaternion,
    InsufficientSamples,
    InvalidStream,
    NoStrides,
    NoCommonWindow,
    ClockSkew,
    StyleMismatch,
    EmptySeries,
    MissingCalibration,
    CorruptSample,
    DimensionMismatch,
    InvalidArgument,
    DegenerateLabels,
    ConvergenceFailure,
    StratificationFailure,
    LengthMismatch,
    SchemaError,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::DegenerateQuaternion: return "DegenerateQuaternion";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::InvalidStream: return "InvalidStream";
    case ErrorCode::NoStrides: return "NoStrides";
    case ErrorCode::NoCommonWindow: return "NoCommonWindow";
    case ErrorCode::ClockSkew: return "ClockSkew";
    case ErrorCode::StyleMismatch: return "StyleMismatch";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::MissingCalibration: return "MissingCalibration";
    case ErrorCode::CorruptSample: return "CorruptSample";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::StratificationFailure: return "StratificationFailure";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by smo_train when the iteration budget runs out.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double violation)
        : Error(ErrorCode::ConvergenceFailure, what), violation_(violation)
    {
    }

    /// Maximal KKT violation (m - M gap) when the solver gave up.
    double violation() const noexcept { return violation_; }

private:
    double violation_;
};

} // namespace pinstream

#endif
