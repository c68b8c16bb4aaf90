#pragma once

// Geodesic boundary-value problem between two positive Lagrangian subspaces:
// find a_j <= 0 so that the partial phase differences reach the pair angles,
// theta_j(1) = beta_j. Solved by shooting with natural-parameter continuation
// in the target angles.

#include <vector>

#include "lagweb/geoflow.hpp"

namespace lagweb {

/// Bounds along a geodesic with non-positive coefficients whose phase stays
/// in [alpha0, alpha1]: g_j <= N and a_j >= -M.
struct AprioriBounds {
  double alpha0 = 0;
  double alpha1 = 0;
  double N = 1;
  double M = 0;
};

AprioriBounds apriori_bounds(double phi0, double phi1);

struct BvpConfig {
  IntegratorConfig integrator{};
  NewtonConfig newton{.max_iterations = 12,
                      .residual_tolerance = 1e-10,
                      .damping = 1.0,
                      .jacobian_fd_step = 1e-6};
  /// Newton tolerance used at intermediate continuation parameters.
  double intermediate_tolerance = 1e-8;
  double continuation_start = 0.05;
  double initial_step = 0.05;
  double min_step = 1e-4;
};

struct BvpSolution {
  PairSpectrum spectrum;
  Eigen::VectorXd coefficients;
  GeodesicTrajectory trajectory;
  double residual_norm = 0;  // max_j |theta_j(1) - beta_j|
  double jacobian_condition = 1;
  int continuation_steps = 0;
  std::vector<double> newton_history;  // residual norms of the final Newton solve
  int maslov = 0;
  bool experimental = false;
};

/// (theta_j(1; a) - beta_j)_j with each entry replaced by its block mean.
Eigen::VectorXd shooting_residual(const PairSpectrum& spectrum, const Eigen::VectorXd& a,
                                  const IntegratorConfig& config = {});

/// Geodesic with negative semi-definite Hamiltonian from lambda0 to lambda1.
/// Requires Maslov index 0; zero-angle blocks are frozen at a_j = 0.
BvpSolution solve_bvp_maslov0(const LagrangianFrame& lambda0, const LagrangianFrame& lambda1,
                              const BvpConfig& config = {});

/// Dispatches on the Maslov index: 0 solves directly, n (transverse) solves
/// the reversed pair and reverses time, anything else needs `experimental`
/// (unconstrained-sign shooting with no existence guarantee) or throws
/// MaslovNonzero.
BvpSolution solve_geodesic(const LagrangianFrame& lambda0, const LagrangianFrame& lambda1,
                           const BvpConfig& config = {}, bool experimental = false);

/// The same geodesic traversed backwards, re-expressed in a compatible
/// lifting based at the original endpoint: g'_j(t) = g_j(1-t) / g_j(1),
/// theta'_j(t) = theta_j(1-t) - theta_j(1), a'_j = -a_j / g_j(1).
GeodesicTrajectory reverse_trajectory(const GeodesicTrajectory& traj);

}  // namespace lagweb
