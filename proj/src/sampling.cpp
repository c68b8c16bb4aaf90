#include "lagweb/sampling.hpp"

#include <algorithm>
#include <numbers>

namespace lagweb {
namespace {

template <typename Matrix>
void gram_schmidt_columns(Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Index k = 0; k < j; ++k) {
        m.col(j) -= m.col(k).dot(m.col(j)) * m.col(k);
      }
    }
    m.col(j).normalize();
  }
}

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                           43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};

double radical_inverse(long index, int base) {
  double result = 0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

}  // namespace

ComplexMatrix random_unitary(Rng& rng, int n) {
  std::normal_distribution<double> normal;
  ComplexMatrix m(n, n);
  for (Index c = 0; c < n; ++c) {
    for (Index r = 0; r < n; ++r) m(r, c) = {normal(rng), normal(rng)};
  }
  gram_schmidt_columns(m);
  return m;
}

Eigen::MatrixXd random_rotation(Rng& rng, int n) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(n, n);
  for (Index c = 0; c < n; ++c) {
    for (Index r = 0; r < n; ++r) m(r, c) = normal(rng);
  }
  gram_schmidt_columns(m);
  if (m.determinant() < 0) m.col(0) = -m.col(0);
  return m;
}

LagrangianFrame random_positive_frame(Rng& rng, int n) {
  std::uniform_real_distribution<double> target(-std::numbers::pi / 2, std::numbers::pi / 2);
  for (;;) {
    const ComplexMatrix u = random_unitary(rng, n);
    const double phase = target(rng);
    if (std::abs(std::cos(phase)) < 1e-3) continue;
    const double shift = (phase - std::arg(u.determinant())) / n;
    return make_frame(FlatCalabiYau{n}, std::polar(1.0, shift) * u);
  }
}

MaslovZeroPair maslov_zero_pair_from_angles(const LagrangianFrame& lambda0,
                                            const Eigen::VectorXd& beta,
                                            const Eigen::MatrixXd& rotation) {
  const Index n = beta.size();
  ComplexVector rotations(n);
  for (Index j = 0; j < n; ++j) rotations(j) = std::polar(1.0, beta(j));
  const ComplexMatrix r = rotation.cast<std::complex<double>>();
  const ComplexMatrix raw =
      lambda0.columns() * r * rotations.asDiagonal() * r.transpose();
  Eigen::VectorXd sorted = beta;
  std::sort(sorted.data(), sorted.data() + n);
  return {lambda0, make_frame(lambda0.ambient(), raw), sorted, rotation};
}

MaslovZeroPair random_maslov_zero_pair(Rng& rng, int n, double max_phase1) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const LagrangianFrame lambda0 = random_positive_frame(rng, n);
    const double phase0 = lambda0.phase();
    if (phase0 > max_phase1 - 0.15) continue;
    const double phase1 = phase0 + (0.15 + 0.85 * unit(rng)) * (max_phase1 - phase0);
    Eigen::VectorXd weights(n);
    for (Index j = 0; j < n; ++j) weights(j) = 0.25 + 0.75 * unit(rng);
    const Eigen::VectorXd beta = weights / weights.sum() * (phase1 - phase0);
    return maslov_zero_pair_from_angles(lambda0, beta, random_rotation(rng, n));
  }
}

Eigen::MatrixXd halton_sphere_points(int n, int count, int offset) {
  if (n < 1 || n + 1 > static_cast<int>(std::size(kPrimes))) {
    throw Error(ErrorKind::InvalidArgument, "unsupported dimension for Halton points");
  }
  Eigen::MatrixXd points(n, count);
  for (int k = 0; k < count; ++k) {
    const long index = static_cast<long>(offset) + k + 1;
    for (int d = 0; d < n; d += 2) {
      const double u1 = radical_inverse(index, kPrimes[d]);
      const double u2 = radical_inverse(index, kPrimes[d + 1]);
      const double radius = std::sqrt(-2.0 * std::log(u1));
      points(d, k) = radius * std::cos(2 * std::numbers::pi * u2);
      if (d + 1 < n) points(d + 1, k) = radius * std::sin(2 * std::numbers::pi * u2);
    }
    points.col(k).normalize();
  }
  return points;
}

}  // namespace lagweb
