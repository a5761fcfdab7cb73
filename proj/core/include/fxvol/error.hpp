#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fxvol {

/// Failure categories surfaced by the library. Each maps to a named error in
/// the module contracts so callers can branch without parsing messages.
enum class ErrorKind {
  FileUnreadable,
  MalformedRow,
  EmptySeries,
  TooFewObservations,
  HoldoutTooLarge,
  InvalidParams,
  SeriesTooShort,
  NonFiniteLikelihood,
  NonStationary,
  OptimizationFailed,
  AllCellsFailed,
  InvalidState,
  NoValidOrigins,
  InvalidInputs,
  PriceOutOfBand,
  NoConvergence,
  SingularDesign,
  MisalignedSeries,
  MissingInputs,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fxvol
