#include "ecgppg/error.hpp"

namespace ecgppg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::BadColumn: return "BadColumn";
    case ErrorCode::NonFiniteSample: return "NonFiniteSample";
    case ErrorCode::EmptySignal: return "EmptySignal";
    case ErrorCode::SampleRateMismatch: return "SampleRateMismatch";
    case ErrorCode::BadSampleRate: return "BadSampleRate";
    case ErrorCode::BadManifest: return "BadManifest";
    case ErrorCode::BadBand: return "BadBand";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::BadLagWindow: return "BadLagWindow";
    case ErrorCode::BadPolicy: return "BadPolicy";
    case ErrorCode::NonDeterministic: return "NonDeterministic";
    case ErrorCode::TimeRegression: return "TimeRegression";
    case ErrorCode::BadTrace: return "BadTrace";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyVerdicts: return "EmptyVerdicts";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what,
             std::optional<std::size_t> index)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code),
      index_(index) {}

}  // namespace ecgppg
