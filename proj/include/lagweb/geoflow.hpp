#pragma once

// Geodesics of positive Lagrangian subspaces in a compatible horizontal
// lifting. With Hamiltonian h(x) = sum a_j x_j^2 in the adapted basis, the
// lifting keeps each frame vector in its own complex line:
//
//   Psi_t(e_j) = sqrt(g_j(t)) e^{i theta_j(t)} Psi_0(e_j),
//   g_j' = -4 a_j tan(phase),   theta_j' = -2 a_j / g_j,
//   phase(t) = phase0 + sum_j theta_j(t).

#include <vector>

#include "lagweb/laggrass.hpp"

namespace lagweb {

struct GeodesicSpec {
  LagrangianFrame base;
  Eigen::MatrixXd adapted_basis;  // real orthogonal
  Eigen::VectorXd coefficients;   // a_j
  double phase0 = 0;

  /// Spec with phase0 = base.phase(); validates shapes and finiteness.
  static GeodesicSpec make(const LagrangianFrame& base, const Eigen::MatrixXd& adapted_basis,
                           const Eigen::VectorXd& coefficients);

  int dim() const { return base.dim(); }
  /// Psi_0 as a complex matrix: base frame times adapted basis.
  ComplexMatrix initial_lift() const;
};

struct GeodesicState {
  Eigen::VectorXd g;
  Eigen::VectorXd theta;
};

struct GeodesicTrajectory {
  GeodesicSpec spec;
  std::vector<double> times;
  Eigen::MatrixXd g;      // samples x n
  Eigen::MatrixXd theta;  // samples x n
  Eigen::VectorXd phase;  // phase0 + sum theta, per sample

  Index sample_count() const { return static_cast<Index>(times.size()); }
  int dim() const { return spec.dim(); }
  GeodesicState state(Index k) const { return {g.row(k).transpose(), theta.row(k).transpose()}; }
  /// Linear interpolation in (g, theta) between grid samples.
  GeodesicState interpolate(double t) const;
};

/// Right-hand side of the reduced system; throws PhaseBlowup / MetricCollapse
/// when the state leaves the positive Grassmannian.
Eigen::VectorXd geodesic_rhs(const Eigen::VectorXd& coefficients, double phase0,
                             const Eigen::VectorXd& state);

GeodesicTrajectory geodesic_ivp(const GeodesicSpec& spec, const IntegratorConfig& config = {});

/// Unnormalized lifted frame Psi_t with columns sqrt(g_j) e^{i theta_j} Psi_0(e_j).
ComplexMatrix horizontal_lift(const GeodesicTrajectory& traj, Index sample);
ComplexMatrix horizontal_lift(const GeodesicTrajectory& traj, const GeodesicState& state);

LagrangianFrame horizontal_frame(const GeodesicTrajectory& traj, Index sample);
LagrangianFrame horizontal_frame_at(const GeodesicTrajectory& traj, double t);

/// Integrates the full frame equation
///   dPsi/dt (x) = -J grad h (Psi x) - tan(phase) grad h (Psi x)
/// with grad h taken in the induced metric of the evolving frame and the
/// phase read off the orthonormalized frame. Independent of (g, theta).
std::vector<ComplexMatrix> frame_ode_oracle(const GeodesicSpec& spec,
                                            const IntegratorConfig& config = {});

struct PhaseSample {
  double t = 0;
  double phase = 0;
  double rate = 0;  // d phase / dt = -2 sum a_j / g_j
};

std::vector<PhaseSample> phase_along(const GeodesicTrajectory& traj);

/// Geometer's Laplacian (minus the trace of the Hessian) of the quadratic
/// form sum a_j x_j^2 in the metric induced by `lift`.
double hamiltonian_laplacian(const ComplexMatrix& lift, const Eigen::VectorXd& coefficients);

/// Real Gram matrix Re(Psi^* Psi).
Eigen::MatrixXd induced_metric(const ComplexMatrix& lift);

}  // namespace lagweb
