#include "srate/error.hpp"

namespace srate {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::CorruptFile: return "CorruptFile";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InvalidSize: return "InvalidSize";
        case ErrorCode::EmptyBuffer: return "EmptyBuffer";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::OverlapError: return "OverlapError";
        case ErrorCode::EmptyAlignment: return "EmptyAlignment";
        case ErrorCode::ZeroDuration: return "ZeroDuration";
        case ErrorCode::EmptyCurve: return "EmptyCurve";
        case ErrorCode::NonPositiveRate: return "NonPositiveRate";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::BufferTooShort: return "BufferTooShort";
        case ErrorCode::TooFewFrames: return "TooFewFrames";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
        case ErrorCode::InputTooShort: return "InputTooShort";
        case ErrorCode::RegionTooShort: return "RegionTooShort";
        case ErrorCode::ModeInputMissing: return "ModeInputMissing";
        case ErrorCode::SampleRateMismatch: return "SampleRateMismatch";
        case ErrorCode::ZeroTargetDuration: return "ZeroTargetDuration";
    }
    return "Unknown";
}

}  // namespace srate
