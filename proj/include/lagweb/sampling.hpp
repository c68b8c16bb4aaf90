#pragma once

// Seeded generators for positive Lagrangian frames, Maslov-zero pairs and
// quasi-random sphere points.

#include <random>

#include "lagweb/laggrass.hpp"

namespace lagweb {

using Rng = std::mt19937_64;

/// Unitary matrix from Gram-Schmidt on a complex Gaussian matrix.
ComplexMatrix random_unitary(Rng& rng, int n);

/// Real rotation (det +1) from Gram-Schmidt on a real Gaussian matrix.
Eigen::MatrixXd random_rotation(Rng& rng, int n);

/// Random unitary times a global phase that puts det in the open right half
/// plane; draws closer than 1e-3 to the imaginary axis are rejected.
LagrangianFrame random_positive_frame(Rng& rng, int n);

struct MaslovZeroPair {
  LagrangianFrame lambda0;
  LagrangianFrame lambda1;
  Eigen::VectorXd beta;  // ground-truth angles, ascending
  Eigen::MatrixXd rotation;
};

/// Lambda_1 = F0 R diag(e^{i beta}) R^T with beta_j > 0 and
/// sum beta = phase1 - phase0, so the pair is transverse with Maslov index 0.
/// phase1 is drawn in (phase0, max_phase1].
MaslovZeroPair random_maslov_zero_pair(Rng& rng, int n, double max_phase1 = 1.2);

/// Pair with prescribed angles in a prescribed rotated basis.
MaslovZeroPair maslov_zero_pair_from_angles(const LagrangianFrame& lambda0,
                                            const Eigen::VectorXd& beta,
                                            const Eigen::MatrixXd& rotation);

/// Unit vectors in R^n from a scrambled-free Halton sequence pushed through
/// Box-Muller. Deterministic for a given `offset`.
Eigen::MatrixXd halton_sphere_points(int n, int count, int offset = 0);

}  // namespace lagweb
