#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace srate {

enum class ErrorCode {
    InvalidArgument,
    UnsupportedFormat,
    CorruptFile,
    IoError,
    InvalidSize,
    EmptyBuffer,
    ParseError,
    OverlapError,
    EmptyAlignment,
    ZeroDuration,
    EmptyCurve,
    NonPositiveRate,
    LengthMismatch,
    ZeroVariance,
    BufferTooShort,
    TooFewFrames,
    ZeroVector,
    AlphaOutOfRange,
    InputTooShort,
    RegionTooShort,
    ModeInputMissing,
    SampleRateMismatch,
    ZeroTargetDuration,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so callers
// (the CLI in particular) can map data errors to exit codes without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace srate
