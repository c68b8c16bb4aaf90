#include "lagweb/error.hpp"

namespace lagweb {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorKind::NotSymmetricUnitary: return "NotSymmetricUnitary";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::NotLagrangian: return "NotLagrangian";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::NotInteger: return "NotInteger";
    case ErrorKind::MembershipCheck: return "MembershipCheck";
    case ErrorKind::PhaseBlowup: return "PhaseBlowup";
    case ErrorKind::MetricCollapse: return "MetricCollapse";
    case ErrorKind::MaslovNonzero: return "MaslovNonzero";
    case ErrorKind::BadPhaseWindow: return "BadPhaseWindow";
    case ErrorKind::SignError: return "SignError";
    case ErrorKind::DegenerateFrame: return "DegenerateFrame";
    case ErrorKind::OriginNode: return "OriginNode";
    case ErrorKind::InconsistentBoundary: return "InconsistentBoundary";
    case ErrorKind::DegenerateMetric: return "DegenerateMetric";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::VerificationFailed: return "VerificationFailed";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what, double quantity,
             double threshold)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what),
      kind_(kind),
      quantity_(quantity),
      threshold_(threshold) {}

}  // namespace lagweb
