#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace crw {

enum class ErrorCode {
  InfeasibleDegreeSequence,
  NotConnectedAfterRetries,
  ZeroMean,
  InvalidDistribution,
  ParameterOutOfRange,
  TooLargeForExact,
  NotConnected,
  TotalUnitOnIrregular,
  BadSubset,
  NotTransitive,
  SameVertex,
  EmptySamples,
  EmptyEstimate,
  NonpositiveTime,
  MissingPsi,
  DegenerateDepth,
  KTooLarge,
  ParseError,
  ConfigError,
  TaskError,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code()` is stable,
// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace crw
