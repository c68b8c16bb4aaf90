#pragma once

// Positive Lagrangian linear subspaces of flat C^n.
//
// Conventions: <u, v> = sum conj(u_j) v_j, omega(u, v) = Im <u, v>, the real
// metric is Re <u, v>, J is multiplication by i, Omega = dz_1 ^ ... ^ dz_n and
// the density rho is identically 1.

#include <vector>

#include "lagweb/numkernel.hpp"

namespace lagweb {

struct FlatCalabiYau {
  int n = 1;

  static double omega(const ComplexVector& u, const ComplexVector& v) {
    return u.dot(v).imag();  // Eigen's dot conjugates the left argument
  }
  static double metric(const ComplexVector& u, const ComplexVector& v) {
    return u.dot(v).real();
  }
  static ComplexVector complex_structure(const ComplexVector& u) {
    return std::complex<double>(0, 1) * u;
  }
  /// Omega evaluated on the columns of `vectors`.
  static std::complex<double> holomorphic_volume(const ComplexMatrix& vectors) {
    return vectors.determinant();
  }
  static constexpr double density() { return 1.0; }

  friend bool operator==(const FlatCalabiYau&, const FlatCalabiYau&) = default;
};

/// Orthonormal real frame of a positive Lagrangian subspace, oriented so that
/// Re det > 0. The columns are also Hermitian-orthonormal, so the frame
/// matrix is unitary.
class LagrangianFrame {
 public:
  const FlatCalabiYau& ambient() const { return ambient_; }
  int dim() const { return ambient_.n; }
  const ComplexMatrix& columns() const { return columns_; }
  /// arg det F in (-pi/2, pi/2).
  double phase() const { return phase_; }

  /// Real coordinates of the orthogonal projection of z onto the subspace.
  Eigen::VectorXd coordinates(const ComplexVector& z) const {
    return (columns_.adjoint() * z).real();
  }
  /// Sup-norm of the component of z normal to the subspace, i.e. Im(F^* z).
  double normal_defect(const ComplexVector& z) const {
    return max_abs((columns_.adjoint() * z).imag());
  }

 private:
  friend LagrangianFrame make_frame(const FlatCalabiYau&, const ComplexMatrix&);
  LagrangianFrame(FlatCalabiYau ambient, ComplexMatrix columns, double phase)
      : ambient_(ambient), columns_(std::move(columns)), phase_(phase) {}

  FlatCalabiYau ambient_;
  ComplexMatrix columns_;
  double phase_ = 0;
};

/// Validates and normalizes a spanning set of a positive Lagrangian subspace:
/// checks omega(f_i, f_j) = 0, orthonormalizes over the reals, negates the
/// first column if needed so that Re det > 0, and caches the phase.
LagrangianFrame make_frame(const FlatCalabiYau& ambient, const ComplexMatrix& raw);

double phase(const LagrangianFrame& frame);

struct PairSpectrum {
  Eigen::VectorXd beta;                    // in [0, pi), ascending
  Eigen::MatrixXd adapted_basis;           // real orthogonal, det +1
  std::vector<std::vector<Index>> blocks;  // indices with equal beta
  double phase0 = 0;
  double phase1 = 0;
  bool transverse = false;
  double membership_residual = 0;  // sup_j |Im F1^* (e^{i beta_j} F0 u_j)|

  int dim() const { return static_cast<int>(beta.size()); }
  /// Mean of beta over the block containing index j.
  double block_beta(std::size_t block) const;
};

/// Orthogonal splitting of a pair: columns u_j of the adapted basis satisfy
/// e^{i beta_j} F0 u_j in Lambda_1.
PairSpectrum pair_decomposition(const LagrangianFrame& lambda0,
                                const LagrangianFrame& lambda1);

struct MaslovIndex {
  int m = 0;
  double integrality_defect = 0;
};

/// m = (sum beta_j + phase0 - phase1) / pi, rounded; throws NotInteger if the
/// raw value is more than 1e-6 away from an integer.
MaslovIndex maslov_index(const LagrangianFrame& lambda0, const LagrangianFrame& lambda1);
MaslovIndex maslov_index(const PairSpectrum& spectrum);

/// Largest principal angle between the real subspaces spanned by the columns.
double principal_angle_distance(const ComplexMatrix& a, const ComplexMatrix& b);
inline double principal_angle_distance(const LagrangianFrame& a, const LagrangianFrame& b) {
  return principal_angle_distance(a.columns(), b.columns());
}

/// Stacks real and imaginary parts: C^n -> R^{2n} column-wise.
Eigen::MatrixXd realify(const ComplexMatrix& m);

}  // namespace lagweb
