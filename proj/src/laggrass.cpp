#include "lagweb/laggrass.hpp"

#include <numbers>

namespace lagweb {

LagrangianFrame make_frame(const FlatCalabiYau& ambient, const ComplexMatrix& raw) {
  const Index n = ambient.n;
  if (n < 1 || raw.rows() != n || raw.cols() != n) {
    throw Error(ErrorKind::InvalidArgument,
                "frame must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!raw.allFinite()) {
    throw Error(ErrorKind::NonFiniteEntry, "frame has non-finite entries");
  }
  Eigen::VectorXd norms(n);
  for (Index j = 0; j < n; ++j) {
    norms(j) = raw.col(j).norm();
    if (!(norms(j) > 0)) {
      throw Error(ErrorKind::DegenerateFrame, "column " + std::to_string(j) + " is zero");
    }
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double w =
          std::abs(FlatCalabiYau::omega(raw.col(i), raw.col(j))) / (norms(i) * norms(j));
      if (w > tol::kLagrangian) {
        throw Error(ErrorKind::NotLagrangian,
                    "omega(f" + std::to_string(i) + ", f" + std::to_string(j) +
                        ") = " + std::to_string(w),
                    w, tol::kLagrangian);
      }
    }
  }

  // Modified Gram-Schmidt with respect to the real inner product, applied
  // twice for orthogonality to working precision.
  ComplexMatrix f = raw;
  for (Index j = 0; j < n; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Index k = 0; k < j; ++k) {
        f.col(j) -= FlatCalabiYau::metric(f.col(k), f.col(j)) * f.col(k);
      }
    }
    const double len = f.col(j).norm();
    if (!(len > 1e-12 * norms(j))) {
      throw Error(ErrorKind::DegenerateFrame,
                  "columns are real-linearly dependent at column " + std::to_string(j),
                  len / norms(j), 1e-12);
    }
    f.col(j) /= len;
  }
  const double unitarity = max_abs(f.adjoint() * f - ComplexMatrix::Identity(n, n));
  if (!(unitarity < tol::kFrameUnitarity)) {
    throw Error(ErrorKind::NotLagrangian,
                "orthonormalized frame is not unitary, defect " + std::to_string(unitarity),
                unitarity, tol::kFrameUnitarity);
  }

  std::complex<double> det = f.determinant();
  if (!(std::abs(det.real()) >= tol::kPositivity)) {
    throw Error(ErrorKind::NotPositive,
                "Re det = " + std::to_string(det.real()) +
                    " (phase is +-pi/2, subspace is not positive)",
                std::abs(det.real()), tol::kPositivity);
  }
  if (det.real() < 0) {
    f.col(0) = -f.col(0);
    det = -det;
  }
  return LagrangianFrame(ambient, std::move(f), std::arg(det));
}

double phase(const LagrangianFrame& frame) { return frame.phase(); }

double PairSpectrum::block_beta(std::size_t block) const {
  double sum = 0;
  for (Index j : blocks.at(block)) sum += beta(j);
  return sum / static_cast<double>(blocks[block].size());
}

PairSpectrum pair_decomposition(const LagrangianFrame& lambda0,
                                const LagrangianFrame& lambda1) {
  if (!(lambda0.ambient() == lambda1.ambient())) {
    throw Error(ErrorKind::InvalidArgument, "frames live in different dimensions");
  }
  const ComplexMatrix u = lambda0.columns().adjoint() * lambda1.columns();
  const ComplexMatrix s = u * u.transpose();
  auto eig = joint_diagonalize_symmetric_unitary<double>(s);

  PairSpectrum out;
  out.beta = eig.args / 2;
  out.adapted_basis = std::move(eig.basis);
  if (out.adapted_basis.determinant() < 0) {
    out.adapted_basis.col(0) = -out.adapted_basis.col(0);
  }
  out.blocks = std::move(eig.blocks);
  out.phase0 = lambda0.phase();
  out.phase1 = lambda1.phase();

  double min_arc = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < eig.args.size(); ++j) {
    min_arc = std::min(min_arc, arc_distance(eig.args(j), 0.0));
  }
  out.transverse = min_arc > tol::kTransverse;

  const ComplexMatrix image = lambda0.columns() * out.adapted_basis.cast<std::complex<double>>();
  double worst = 0;
  for (Index j = 0; j < image.cols(); ++j) {
    const ComplexVector rotated = std::polar(1.0, out.beta(j)) * image.col(j);
    worst = std::max(worst, lambda1.normal_defect(rotated));
  }
  out.membership_residual = worst;
  if (!(worst < tol::kMembership)) {
    throw Error(ErrorKind::MembershipCheck,
                "rotated adapted basis leaves Lambda_1 by " + std::to_string(worst), worst,
                tol::kMembership);
  }
  return out;
}

MaslovIndex maslov_index(const PairSpectrum& spectrum) {
  const double raw =
      (spectrum.beta.sum() + spectrum.phase0 - spectrum.phase1) / std::numbers::pi;
  const double nearest = std::round(raw);
  const double defect = std::abs(raw - nearest);
  if (!(defect < tol::kIntegralityError)) {
    throw Error(ErrorKind::NotInteger,
                "Maslov index " + std::to_string(raw) + " is not an integer", defect,
                tol::kIntegralityError);
  }
  return {static_cast<int>(nearest), defect};
}

MaslovIndex maslov_index(const LagrangianFrame& lambda0, const LagrangianFrame& lambda1) {
  return maslov_index(pair_decomposition(lambda0, lambda1));
}

Eigen::MatrixXd realify(const ComplexMatrix& m) {
  Eigen::MatrixXd out(2 * m.rows(), m.cols());
  out.topRows(m.rows()) = m.real();
  out.bottomRows(m.rows()) = m.imag();
  return out;
}

double principal_angle_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::InvalidArgument, "subspaces of different shapes");
  }
  const Eigen::MatrixXd ra = realify(a);
  const Eigen::MatrixXd rb = realify(b);
  const Eigen::MatrixXd qa =
      Eigen::HouseholderQR<Eigen::MatrixXd>(ra).householderQ() *
      Eigen::MatrixXd::Identity(ra.rows(), ra.cols());
  const Eigen::MatrixXd qb =
      Eigen::HouseholderQR<Eigen::MatrixXd>(rb).householderQ() *
      Eigen::MatrixXd::Identity(rb.rows(), rb.cols());
  const Eigen::MatrixXd normal_part = qb - qa * (qa.transpose() * qb);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normal_part);
  return std::asin(std::min(1.0, svd.singularValues()(0)));
}

}  // namespace lagweb
