#include "crw/error.hpp"

namespace crw {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InfeasibleDegreeSequence: return "InfeasibleDegreeSequence";
    case ErrorCode::NotConnectedAfterRetries: return "NotConnectedAfterRetries";
    case ErrorCode::ZeroMean: return "ZeroMean";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::TooLargeForExact: return "TooLargeForExact";
    case ErrorCode::NotConnected: return "NotConnected";
    case ErrorCode::TotalUnitOnIrregular: return "TotalUnitOnIrregular";
    case ErrorCode::BadSubset: return "BadSubset";
    case ErrorCode::NotTransitive: return "NotTransitive";
    case ErrorCode::SameVertex: return "SameVertex";
    case ErrorCode::EmptySamples: return "EmptySamples";
    case ErrorCode::EmptyEstimate: return "EmptyEstimate";
    case ErrorCode::NonpositiveTime: return "NonpositiveTime";
    case ErrorCode::MissingPsi: return "MissingPsi";
    case ErrorCode::DegenerateDepth: return "DegenerateDepth";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::TaskError: return "TaskError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace crw
