#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shockduct {

/// Failure categories reported by the library. Each maps to a named
/// condition callers may want to react to (e.g. shrink an amplitude,
/// widen a domain) rather than a generic runtime failure.
enum class ErrorKind {
  Domain,
  ZeroStrength,
  Orientation,
  NotAdmissible,
  Pole,
  TailTruncation,
  InsufficientTail,
  AmplitudeTooLarge,
  BlowupDetected,
  SingularDenominator,
  TailUnbounded,
  AnsatzOutOfRange,
  BoundaryContamination,
  ZeroMassViolation,
  MultiCrossing,
  Config,
  Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace shockduct
