#ifndef ECGPPG_ERROR_HPP
#define ECGPPG_ERROR_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ecgppg {

enum class ErrorCode {
  MissingFile,
  BadColumn,
  NonFiniteSample,
  EmptySignal,
  SampleRateMismatch,
  BadSampleRate,
  BadManifest,
  BadBand,
  SignalTooShort,
  BadLagWindow,
  BadPolicy,
  NonDeterministic,
  TimeRegression,
  BadTrace,
  LengthMismatch,
  EmptyVerdicts,
  ZeroVariance,
  TooFewSamples,
  BadSpec,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `index()` carries the offending
/// sample index or line number for the codes that have one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> index = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace ecgppg

#endif  // ECGPPG_ERROR_HPP
