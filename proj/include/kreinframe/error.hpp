#ifndef KREINFRAME_ERROR_HPP
#define KREINFRAME_ERROR_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace kreinframe {

enum class ErrorCode {
  NotAnInvolution,
  DimensionMismatch,
  ZeroSubspace,
  ZeroVector,
  NotRegular,
  NotContained,
  NotUniformlyDefinite,
  NotDefinite,
  NeutralVector,
  NotAJFrame,
  IndexOutOfRange,
  NonPositiveWeight,
  IndefiniteOrNeutralSubspace,
  NotAJFusionFrame,
  SingularFrameOperator,
  IndefiniteSpan,
  NotSurjective,
  NotPositiveDefinite,
  ParseError,
  SchemaError,
  InfeasibleConfig,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotAnInvolution: return "NotAnInvolution";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroSubspace: return "ZeroSubspace";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NotRegular: return "NotRegular";
    case ErrorCode::NotContained: return "NotContained";
    case ErrorCode::NotUniformlyDefinite: return "NotUniformlyDefinite";
    case ErrorCode::NotDefinite: return "NotDefinite";
    case ErrorCode::NeutralVector: return "NeutralVector";
    case ErrorCode::NotAJFrame: return "NotAJFrame";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::IndefiniteOrNeutralSubspace: return "IndefiniteOrNeutralSubspace";
    case ErrorCode::NotAJFusionFrame: return "NotAJFusionFrame";
    case ErrorCode::SingularFrameOperator: return "SingularFrameOperator";
    case ErrorCode::IndefiniteSpan: return "IndefiniteSpan";
    case ErrorCode::NotSurjective: return "NotSurjective";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InfeasibleConfig: return "InfeasibleConfig";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable code and, where one exists, the
/// offending index and a witness vector.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Error(ErrorCode code, const std::string& message, std::size_t index)
      : Error(code, message) {
    index_ = index;
  }

  Error(ErrorCode code, const std::string& message, std::size_t index, Eigen::VectorXd witness)
      : Error(code, message, index) {
    witness_ = std::move(witness);
  }

  ErrorCode code() const noexcept { return code_; }
  const std::optional<std::size_t>& index() const noexcept { return index_; }
  const std::optional<Eigen::VectorXd>& witness() const noexcept { return witness_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
  std::optional<Eigen::VectorXd> witness_;
};

}  // namespace kreinframe

#endif  // KREINFRAME_ERROR_HPP
