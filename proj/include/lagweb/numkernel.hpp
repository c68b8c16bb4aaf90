#pragma once

// Dense kernels the geometry modules are built on: validated complex
// matrices, Jacobi diagonalization of symmetric unitary matrices, fixed-step
// RK4 and a finite-difference Newton solver. Everything here is a pure
// function of its arguments.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lagweb/error.hpp"
#include "lagweb/tolerances.hpp"

namespace lagweb {

using Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using ComplexMatrixX = MatrixX<std::complex<Scalar>>;
template <typename Scalar>
using ComplexVectorX = VectorX<std::complex<Scalar>>;

using ComplexMatrix = ComplexMatrixX<double>;
using ComplexVector = ComplexVectorX<double>;

/// Builds a matrix from row-major entries, rejecting NaN/Inf.
template <typename Scalar>
ComplexMatrixX<Scalar> make_complex_matrix(
    Index rows, Index cols, std::span<const std::complex<Scalar>> row_major) {
  if (rows <= 0 || cols <= 0) {
    throw Error(ErrorKind::InvalidArgument, "matrix dimensions must be positive");
  }
  if (static_cast<Index>(row_major.size()) != rows * cols) {
    throw Error(ErrorKind::InvalidArgument,
                "expected " + std::to_string(rows * cols) + " entries, got " +
                    std::to_string(row_major.size()));
  }
  ComplexMatrixX<Scalar> m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const auto& z = row_major[static_cast<std::size_t>(r * cols + c)];
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw Error(ErrorKind::NonFiniteEntry,
                    "entry (" + std::to_string(r) + "," + std::to_string(c) +
                        ") is not finite");
      }
      m(r, c) = z;
    }
  }
  return m;
}

template <typename Derived>
typename Derived::RealScalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? typename Derived::RealScalar(0)
                       : m.cwiseAbs().maxCoeff();
}

/// Largest absolute off-diagonal entry.
template <typename Derived>
typename Derived::RealScalar max_off_diagonal(const Eigen::MatrixBase<Derived>& m) {
  typename Derived::RealScalar worst(0);
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) {
      if (r != c) worst = std::max(worst, std::abs(m(r, c)));
    }
  }
  return worst;
}

/// Distance between two points of the unit circle given by their arguments.
template <typename Scalar>
Scalar arc_distance(Scalar a, Scalar b) {
  constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  Scalar d = std::fmod(std::abs(a - b), two_pi);
  return std::min(d, two_pi - d);
}

namespace detail {

// Cyclic Jacobi sweeps that drive the off-diagonal entries (restricted to
// `indices`) of every matrix in `mats` towards zero with one shared sequence
// of plane rotations. With a single matrix this is the classical method; with
// several commuting matrices it converges to a joint eigenbasis. Rotations
// are accumulated into the columns of `basis`.
template <typename Scalar>
void joint_jacobi(std::vector<MatrixX<Scalar>*> mats, MatrixX<Scalar>& basis,
                  const std::vector<Index>& indices, Scalar tolerance,
                  int max_sweeps = 100) {
  const std::size_t m = indices.size();
  if (m < 2) return;
  auto off_norm = [&] {
    Scalar worst(0);
    for (const auto* a : mats) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
          worst = std::max(worst, std::abs((*a)(indices[i], indices[j])));
        }
      }
    }
    return worst;
  };
  for (int sweep = 0; sweep < max_sweeps && off_norm() > tolerance; ++sweep) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        const Index p = indices[i];
        const Index q = indices[j];
        // Off-diagonal after rotation is v . h_k with v = (cos 2t, sin 2t),
        // h_k = (a_pq, (a_pp - a_qq) / 2); pick v minimizing sum (v . h_k)^2.
        Scalar g00(0), g01(0), g11(0), largest(0);
        for (const auto* a : mats) {
          const Scalar h0 = (*a)(p, q);
          const Scalar h1 = ((*a)(p, p) - (*a)(q, q)) / 2;
          g00 += h0 * h0;
          g01 += h0 * h1;
          g11 += h1 * h1;
          largest = std::max(largest, std::abs(h0));
        }
        if (largest <= tolerance / 16) continue;
        const Scalar psi = std::atan2(2 * g01, g00 - g11) / 2;
        Scalar v0 = -std::sin(psi);
        Scalar v1 = std::cos(psi);
        if (v0 < 0) {
          v0 = -v0;
          v1 = -v1;
        }
        const Scalar c = std::sqrt((1 + v0) / 2);
        const Scalar s = v1 / (2 * c);
        for (auto* a : mats) {
          for (Index r = 0; r < a->rows(); ++r) {
            const Scalar arp = (*a)(r, p);
            const Scalar arq = (*a)(r, q);
            (*a)(r, p) = c * arp - s * arq;
            (*a)(r, q) = s * arp + c * arq;
          }
          for (Index r = 0; r < a->cols(); ++r) {
            const Scalar apr = (*a)(p, r);
            const Scalar aqr = (*a)(q, r);
            (*a)(p, r) = c * apr - s * aqr;
            (*a)(q, r) = s * apr + c * aqr;
          }
        }
        for (Index r = 0; r < basis.rows(); ++r) {
          const Scalar vp = basis(r, p);
          const Scalar vq = basis(r, q);
          basis(r, p) = c * vp - s * vq;
          basis(r, q) = s * vp + c * vq;
        }
      }
    }
  }
}

}  // namespace detail

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues ascending; eigenvectors in the columns of `vectors`.
template <typename Scalar>
struct SymmetricEigen {
  VectorX<Scalar> values;
  MatrixX<Scalar> vectors;
};

template <typename Scalar>
SymmetricEigen<Scalar> jacobi_eigen(const MatrixX<Scalar>& symmetric,
                                    Scalar tolerance = Scalar(tol::kJacobi)) {
  const Index n = symmetric.rows();
  if (symmetric.cols() != n) {
    throw Error(ErrorKind::InvalidArgument, "jacobi_eigen needs a square matrix");
  }
  MatrixX<Scalar> a = symmetric;
  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);
  std::vector<Index> all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  const Scalar scale = std::max(Scalar(1), max_abs(symmetric));
  detail::joint_jacobi<Scalar>({&a}, v, all, tolerance * scale);
  std::vector<Index> order = all;
  std::sort(order.begin(), order.end(),
            [&](Index x, Index y) { return a(x, x) < a(y, y); });
  SymmetricEigen<Scalar> out{VectorX<Scalar>(n), MatrixX<Scalar>(n, n)};
  for (Index k = 0; k < n; ++k) {
    out.values(k) = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

/// Real orthogonal diagonalizer of a complex symmetric unitary matrix.
template <typename Scalar>
struct SymmetricUnitaryEigen {
  MatrixX<Scalar> basis;                  // O with O^T S O diagonal
  VectorX<Scalar> args;                   // arguments in [0, 2 pi), ascending
  std::vector<std::vector<Index>> blocks; // indices grouped by equal argument
};

/// Joint diagonalization of Re S and Im S for S symmetric and unitary. Those
/// two real symmetric matrices commute, so one real orthogonal basis
/// diagonalizes both.
///
/// Stage 1 diagonalizes Re S. Stage 2 resolves each cluster of (nearly) equal
/// Re-eigenvalues by rotating within the cluster against Im S. A final joint
/// sweep over both matrices removes the cross-talk that near-equal but
/// distinct Re-eigenvalues leave behind.
template <typename Scalar>
SymmetricUnitaryEigen<Scalar> joint_diagonalize_symmetric_unitary(
    const ComplexMatrixX<Scalar>& s, Scalar cluster_tol = Scalar(tol::kCluster)) {
  const Index n = s.rows();
  if (n == 0 || s.cols() != n) {
    throw Error(ErrorKind::InvalidArgument, "expected a non-empty square matrix");
  }
  const Scalar asym = max_abs(s - s.transpose());
  const Scalar nonunitary =
      max_abs(s.adjoint() * s - ComplexMatrixX<Scalar>::Identity(n, n));
  const Scalar worst = std::max(asym, nonunitary);
  if (!(worst < Scalar(tol::kSymmetricUnitary))) {
    throw Error(ErrorKind::NotSymmetricUnitary,
                "symmetry/unitarity defect " + std::to_string(worst),
                static_cast<double>(worst), tol::kSymmetricUnitary);
  }

  MatrixX<Scalar> re = s.real();
  MatrixX<Scalar> im = s.imag();
  re = (re + re.transpose()).eval() / 2;
  im = (im + im.transpose()).eval() / 2;
  MatrixX<Scalar> basis = MatrixX<Scalar>::Identity(n, n);
  std::vector<Index> all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  const Scalar jacobi_tol = Scalar(tol::kJacobi);

  detail::joint_jacobi<Scalar>({&re}, basis, all, jacobi_tol);
  im = (basis.transpose() * im * basis).eval();

  // Clusters of Re-eigenvalues. Deliberately loose: stage 2 and the polish
  // sweep are exact on commuting pairs, so over-grouping costs nothing.
  const Scalar re_cluster = std::max(cluster_tol, Scalar(1e-6));
  std::vector<Index> by_re = all;
  std::sort(by_re.begin(), by_re.end(),
            [&](Index x, Index y) { return re(x, x) < re(y, y); });
  std::vector<Index> cluster{by_re.front()};
  auto flush = [&] {
    detail::joint_jacobi<Scalar>({&re, &im}, basis, cluster, jacobi_tol);
    cluster.clear();
  };
  for (std::size_t k = 1; k < by_re.size(); ++k) {
    if (re(by_re[k], by_re[k]) - re(by_re[k - 1], by_re[k - 1]) > re_cluster) flush();
    cluster.push_back(by_re[k]);
  }
  flush();

  detail::joint_jacobi<Scalar>({&re, &im}, basis, all, jacobi_tol);

  constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  VectorX<Scalar> raw_args(n);
  for (Index k = 0; k < n; ++k) {
    Scalar arg = std::atan2(im(k, k), re(k, k));
    if (arg < 0) arg += two_pi;
    // Points within the cluster tolerance of 1 are treated as exactly 1.
    if (two_pi - arg < cluster_tol || arg >= two_pi) arg = 0;
    raw_args(k) = arg;
  }
  std::vector<Index> order = all;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index x, Index y) { return raw_args(x) < raw_args(y); });

  SymmetricUnitaryEigen<Scalar> out{MatrixX<Scalar>(n, n), VectorX<Scalar>(n), {}};
  for (Index k = 0; k < n; ++k) {
    out.basis.col(k) = basis.col(order[static_cast<std::size_t>(k)]);
    out.args(k) = raw_args(order[static_cast<std::size_t>(k)]);
  }
  out.blocks.push_back({0});
  for (Index k = 1; k < n; ++k) {
    if (arc_distance(out.args(k), out.args(k - 1)) < cluster_tol) {
      out.blocks.back().push_back(k);
    } else {
      out.blocks.push_back({k});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixed-step classical Runge-Kutta.

struct IntegratorConfig {
  int step_count = 2000;
};

template <typename Scalar>
struct SampledTrajectory {
  std::vector<Scalar> times;
  std::vector<VectorX<Scalar>> states;
};

/// Integrates y' = field(t, y) from t0 to t1 with classical RK4 on a uniform
/// grid. `observer(t, y)` is called on every sample (including the initial
/// one) and may throw to abort. Grid times are t0 + k h, not accumulated.
template <typename Scalar, typename Field, typename Observer>
SampledTrajectory<Scalar> integrate_rk4(Field&& field, const VectorX<Scalar>& y0,
                                        Scalar t0, Scalar t1,
                                        const IntegratorConfig& config,
                                        Observer&& observer) {
  if (config.step_count < 1) {
    throw Error(ErrorKind::InvalidArgument, "step_count must be at least 1",
                config.step_count, 1);
  }
  if (!(t1 > t0)) {
    throw Error(ErrorKind::InvalidArgument, "integration interval must have t1 > t0");
  }
  const int steps = config.step_count;
  const Scalar h = (t1 - t0) / steps;
  SampledTrajectory<Scalar> out;
  out.times.reserve(static_cast<std::size_t>(steps) + 1);
  out.states.reserve(static_cast<std::size_t>(steps) + 1);
  VectorX<Scalar> y = y0;
  if (!y.allFinite()) {
    throw Error(ErrorKind::NonFiniteState, "initial state is not finite");
  }
  observer(t0, y);
  out.times.push_back(t0);
  out.states.push_back(y);
  for (int k = 0; k < steps; ++k) {
    const Scalar t = t0 + h * k;
    const VectorX<Scalar> k1 = field(t, y);
    const VectorX<Scalar> k2 = field(t + h / 2, VectorX<Scalar>(y + (h / 2) * k1));
    const VectorX<Scalar> k3 = field(t + h / 2, VectorX<Scalar>(y + (h / 2) * k2));
    const VectorX<Scalar> k4 = field(t + h, VectorX<Scalar>(y + h * k3));
    y += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!y.allFinite()) {
      throw Error(ErrorKind::NonFiniteState,
                  "state became non-finite at step " + std::to_string(k + 1),
                  static_cast<double>(t + h));
    }
    const Scalar t_next = (k + 1 == steps) ? t1 : t0 + h * (k + 1);
    observer(t_next, y);
    out.times.push_back(t_next);
    out.states.push_back(y);
  }
  return out;
}

template <typename Scalar, typename Field>
SampledTrajectory<Scalar> integrate_rk4(Field&& field, const VectorX<Scalar>& y0,
                                        Scalar t0, Scalar t1,
                                        const IntegratorConfig& config) {
  return integrate_rk4(std::forward<Field>(field), y0, t0, t1, config,
                       [](Scalar, const VectorX<Scalar>&) {});
}

// ---------------------------------------------------------------------------
// Damped Newton with central-difference Jacobians.

struct NewtonConfig {
  int max_iterations = 50;
  double residual_tolerance = 1e-10;
  double damping = 1.0;
  double jacobian_fd_step = 1e-6;
};

template <typename Scalar>
struct NewtonResult {
  VectorX<Scalar> root;
  int iterations = 0;
  Scalar final_residual_norm = 0;
  Scalar jacobian_condition = 0;
  /// Sup-norm of the residual at every iterate, starting with x0.
  std::vector<Scalar> residual_history;
};

template <typename Scalar, typename Residual>
MatrixX<Scalar> central_difference_jacobian(Residual&& residual,
                                            const VectorX<Scalar>& x, Scalar step) {
  const Index n = x.size();
  MatrixX<Scalar> jac;
  for (Index j = 0; j < n; ++j) {
    VectorX<Scalar> plus = x;
    VectorX<Scalar> minus = x;
    plus(j) += step;
    minus(j) -= step;
    const VectorX<Scalar> column = (residual(plus) - residual(minus)) / (2 * step);
    if (j == 0) jac.resize(column.size(), n);
    jac.col(j) = column;
  }
  return jac;
}

template <typename Scalar>
Scalar condition_number(const MatrixX<Scalar>& m) {
  if (m.size() == 0) return Scalar(1);
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(m);
  const auto& sv = svd.singularValues();
  const Scalar smallest = sv(sv.size() - 1);
  return smallest > 0 ? sv(0) / smallest : std::numeric_limits<Scalar>::infinity();
}

/// Solves residual(x) = 0. `project` is applied to every new iterate (e.g. to
/// keep it inside a trust box); pass an empty function to disable.
template <typename Scalar, typename Residual>
NewtonResult<Scalar> newton_solve(
    Residual&& residual, const VectorX<Scalar>& x0, const NewtonConfig& config,
    const std::function<void(VectorX<Scalar>&)>& project = {}) {
  if (config.max_iterations < 1 || !(config.residual_tolerance > 0) ||
      !(config.damping > 0 && config.damping <= 1) || !(config.jacobian_fd_step > 0)) {
    throw Error(ErrorKind::InvalidArgument, "invalid NewtonConfig");
  }
  const Scalar step = Scalar(config.jacobian_fd_step);
  NewtonResult<Scalar> out;
  VectorX<Scalar> x = x0;
  VectorX<Scalar> f = residual(x);
  Scalar norm = f.size() ? f.cwiseAbs().maxCoeff() : Scalar(0);
  out.residual_history.push_back(norm);
  int iterations = 0;
  while (!(norm < Scalar(config.residual_tolerance))) {
    if (!std::isfinite(norm)) {
      throw Error(ErrorKind::NonFiniteState, "residual is not finite");
    }
    if (iterations == config.max_iterations) {
      throw Error(ErrorKind::NoConvergence,
                  "Newton did not converge in " + std::to_string(iterations) +
                      " iterations, residual " + std::to_string(norm),
                  static_cast<double>(norm), config.residual_tolerance);
    }
    const MatrixX<Scalar> jac = central_difference_jacobian(residual, x, step);
    Eigen::FullPivLU<MatrixX<Scalar>> lu(jac);
    if (!lu.isInvertible()) {
      throw Error(ErrorKind::SingularJacobian, "Jacobian is singular",
                  static_cast<double>(condition_number(jac)));
    }
    x -= Scalar(config.damping) * lu.solve(f);
    if (project) project(x);
    f = residual(x);
    norm = f.cwiseAbs().maxCoeff();
    out.residual_history.push_back(norm);
    ++iterations;
  }
  out.root = x;
  out.iterations = iterations;
  out.final_residual_norm = norm;
  out.jacobian_condition =
      condition_number(central_difference_jacobian(residual, x, step));
  return out;
}

/// Largest ratio r_{k+1} / r_k^2 over the last `window` Newton updates,
/// ignoring updates that landed below `noise_floor`.
template <typename Scalar>
Scalar quadratic_rate(const std::vector<Scalar>& history, std::size_t window = 3,
                      Scalar noise_floor = Scalar(1e-13)) {
  Scalar worst(0);
  const std::size_t count = history.size();
  const std::size_t first = count > window + 1 ? count - window - 1 : 0;
  for (std::size_t k = first; k + 1 < count; ++k) {
    if (history[k + 1] < noise_floor) continue;
    worst = std::max(worst, history[k + 1] / (history[k] * history[k]));
  }
  return worst;
}

}  // namespace lagweb
