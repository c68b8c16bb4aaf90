#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lagweb {

enum class ErrorKind {
  InvalidArgument,
  NonFiniteEntry,
  NotSymmetricUnitary,
  NonFiniteState,
  NoConvergence,
  SingularJacobian,
  NotLagrangian,
  NotPositive,
  NotInteger,
  MembershipCheck,
  PhaseBlowup,
  MetricCollapse,
  MaslovNonzero,
  BadPhaseWindow,
  SignError,
  DegenerateFrame,
  OriginNode,
  InconsistentBoundary,
  DegenerateMetric,
  IoError,
  ParseError,
  VerificationFailed,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure in the library is reported through this type. `quantity`
/// is the offending measured value and `threshold` the limit it violated;
/// either may be NaN when the failure is not a threshold comparison.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, double quantity = std::nan(""),
        double threshold = std::nan(""));

  ErrorKind kind() const noexcept { return kind_; }
  double quantity() const noexcept { return quantity_; }
  double threshold() const noexcept { return threshold_; }

 private:
  ErrorKind kind_;
  double quantity_;
  double threshold_;
};

}  // namespace lagweb
