#pragma once

// Numerical tolerances shared across modules. Construction-time checks use
// the tight values; identities derived from computed quantities use the
// looser ones.
namespace lagweb::tol {

inline constexpr double kFrameUnitarity = 1e-10;
inline constexpr double kLagrangian = 1e-8;
inline constexpr double kPositivity = 1e-10;
inline constexpr double kSymmetricUnitary = 1e-10;
inline constexpr double kJacobi = 1e-13;
inline constexpr double kCluster = 1e-8;
inline constexpr double kMembership = 1e-8;
inline constexpr double kTransverse = 1e-8;
inline constexpr double kIntegralityValid = 1e-8;
inline constexpr double kIntegralityError = 1e-6;
inline constexpr double kPhaseMargin = 1e-6;
inline constexpr double kMinMetric = 1e-9;
inline constexpr double kBoundary = 1e-8;
inline constexpr double kOriginNorm = 1e-12;
inline constexpr double kFluxSpreadError = 1e-4;
inline constexpr double kDegenerateMetric = 1e-14;

}  // namespace lagweb::tol
