#include "lagweb/geoflow.hpp"

#include <algorithm>
#include <numbers>

namespace lagweb {
namespace {

constexpr double kPhaseLimit = std::numbers::pi / 2 - tol::kPhaseMargin;

void check_phase(double phase) {
  if (!(std::abs(phase) < kPhaseLimit)) {
    throw Error(ErrorKind::PhaseBlowup,
                "phase " + std::to_string(phase) + " left the positive Grassmannian",
                std::abs(phase), kPhaseLimit);
  }
}

}  // namespace

GeodesicSpec GeodesicSpec::make(const LagrangianFrame& base,
                                const Eigen::MatrixXd& adapted_basis,
                                const Eigen::VectorXd& coefficients) {
  const Index n = base.dim();
  if (adapted_basis.rows() != n || adapted_basis.cols() != n || coefficients.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "geodesic spec dimensions do not match");
  }
  if (!coefficients.allFinite() || !adapted_basis.allFinite()) {
    throw Error(ErrorKind::NonFiniteEntry, "geodesic spec has non-finite entries");
  }
  const double orth = max_abs(adapted_basis.transpose() * adapted_basis -
                              Eigen::MatrixXd::Identity(n, n));
  if (!(orth < tol::kFrameUnitarity)) {
    throw Error(ErrorKind::InvalidArgument, "adapted basis is not orthogonal", orth,
                tol::kFrameUnitarity);
  }
  return {base, adapted_basis, coefficients, base.phase()};
}

ComplexMatrix GeodesicSpec::initial_lift() const {
  return base.columns() * adapted_basis.cast<std::complex<double>>();
}

GeodesicState GeodesicTrajectory::interpolate(double t) const {
  if (!(t >= times.front() && t <= times.back())) {
    throw Error(ErrorKind::InvalidArgument, "time " + std::to_string(t) + " outside [0,1]");
  }
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const Index hi = std::min<Index>(static_cast<Index>(it - times.begin()), sample_count() - 1);
  const Index lo = std::max<Index>(hi - 1, 0);
  if (hi == lo) return state(lo);
  const double w = (t - times[lo]) / (times[hi] - times[lo]);
  return {(1 - w) * g.row(lo).transpose() + w * g.row(hi).transpose(),
          (1 - w) * theta.row(lo).transpose() + w * theta.row(hi).transpose()};
}

Eigen::VectorXd geodesic_rhs(const Eigen::VectorXd& a, double phase0,
                             const Eigen::VectorXd& state) {
  const Index n = a.size();
  const auto g = state.head(n);
  const auto theta = state.tail(n);
  const double phase = phase0 + theta.sum();
  check_phase(phase);
  if (!(g.minCoeff() >= tol::kMinMetric)) {
    throw Error(ErrorKind::MetricCollapse, "metric coefficient collapsed", g.minCoeff(),
                tol::kMinMetric);
  }
  Eigen::VectorXd rate(2 * n);
  rate.head(n) = -4.0 * std::tan(phase) * a;
  rate.tail(n) = -2.0 * a.cwiseQuotient(g);
  return rate;
}

GeodesicTrajectory geodesic_ivp(const GeodesicSpec& spec, const IntegratorConfig& config) {
  const Index n = spec.dim();
  Eigen::VectorXd y0(2 * n);
  y0.head(n).setOnes();
  y0.tail(n).setZero();
  const Eigen::VectorXd a = spec.coefficients;
  const double phase0 = spec.phase0;
  check_phase(phase0);
  auto field = [&](double, const Eigen::VectorXd& y) { return geodesic_rhs(a, phase0, y); };
  auto observer = [&](double, const Eigen::VectorXd& y) {
    check_phase(phase0 + y.tail(n).sum());
    if (!(y.head(n).minCoeff() >= tol::kMinMetric)) {
      throw Error(ErrorKind::MetricCollapse, "metric coefficient collapsed",
                  y.head(n).minCoeff(), tol::kMinMetric);
    }
  };
  const auto sampled = integrate_rk4<double>(field, y0, 0.0, 1.0, config, observer);

  const Index count = static_cast<Index>(sampled.times.size());
  GeodesicTrajectory traj{spec, sampled.times, Eigen::MatrixXd(count, n),
                          Eigen::MatrixXd(count, n), Eigen::VectorXd(count)};
  for (Index k = 0; k < count; ++k) {
    const auto& y = sampled.states[static_cast<std::size_t>(k)];
    traj.g.row(k) = y.head(n).transpose();
    traj.theta.row(k) = y.tail(n).transpose();
    traj.phase(k) = phase0 + y.tail(n).sum();
  }
  return traj;
}

ComplexMatrix horizontal_lift(const GeodesicTrajectory& traj, const GeodesicState& state) {
  const Index n = traj.dim();
  ComplexVector scale(n);
  for (Index j = 0; j < n; ++j) scale(j) = std::polar(std::sqrt(state.g(j)), state.theta(j));
  return traj.spec.initial_lift() * scale.asDiagonal();
}

ComplexMatrix horizontal_lift(const GeodesicTrajectory& traj, Index sample) {
  return horizontal_lift(traj, traj.state(sample));
}

LagrangianFrame horizontal_frame(const GeodesicTrajectory& traj, Index sample) {
  return make_frame(traj.spec.base.ambient(), horizontal_lift(traj, sample));
}

LagrangianFrame horizontal_frame_at(const GeodesicTrajectory& traj, double t) {
  return make_frame(traj.spec.base.ambient(), horizontal_lift(traj, traj.interpolate(t)));
}

Eigen::MatrixXd induced_metric(const ComplexMatrix& lift) {
  return (lift.adjoint() * lift).real();
}

double hamiltonian_laplacian(const ComplexMatrix& lift, const Eigen::VectorXd& a) {
  const Eigen::MatrixXd metric = induced_metric(lift);
  const Eigen::MatrixXd hessian = (2.0 * a).asDiagonal();
  return -metric.ldlt().solve(hessian).trace();
}

std::vector<ComplexMatrix> frame_ode_oracle(const GeodesicSpec& spec,
                                            const IntegratorConfig& config) {
  const Index n = spec.dim();
  using CMap = Eigen::Map<const ComplexMatrix>;
  const Eigen::MatrixXd two_a = (2.0 * spec.coefficients).asDiagonal();
  const std::complex<double> i(0, 1);

  auto frame_phase = [&](const ComplexMatrix& psi) {
    ComplexMatrix q = psi;
    for (Index j = 0; j < n; ++j) {
      for (int pass = 0; pass < 2; ++pass) {
        for (Index k = 0; k < j; ++k) {
          q.col(j) -= q.col(k).dot(q.col(j)).real() * q.col(k);
        }
      }
      q.col(j).normalize();
    }
    return std::arg(q.determinant());
  };

  auto field = [&](double, const Eigen::VectorXd& y) {
    const CMap psi(reinterpret_cast<const std::complex<double>*>(y.data()), n, n);
    const ComplexMatrix lift = psi;
    const double phase = frame_phase(lift);
    check_phase(phase);
    // grad h at Psi(e_j) = sum_k 2 a_j g^{jk} Psi(e_k)
    const Eigen::MatrixXd coeff = induced_metric(lift).ldlt().solve(two_a);
    const ComplexMatrix grad = lift * coeff.cast<std::complex<double>>();
    const ComplexMatrix rate = -(i + std::tan(phase)) * grad;
    Eigen::VectorXd out(2 * n * n);
    Eigen::Map<ComplexMatrix>(reinterpret_cast<std::complex<double>*>(out.data()), n, n) = rate;
    return out;
  };

  const ComplexMatrix start = spec.initial_lift();
  Eigen::VectorXd y0(2 * n * n);
  Eigen::Map<ComplexMatrix>(reinterpret_cast<std::complex<double>*>(y0.data()), n, n) = start;
  const auto sampled = integrate_rk4<double>(field, y0, 0.0, 1.0, config);

  std::vector<ComplexMatrix> frames;
  frames.reserve(sampled.states.size());
  for (const auto& y : sampled.states) {
    frames.emplace_back(CMap(reinterpret_cast<const std::complex<double>*>(y.data()), n, n));
  }
  return frames;
}

std::vector<PhaseSample> phase_along(const GeodesicTrajectory& traj) {
  std::vector<PhaseSample> out;
  out.reserve(traj.times.size());
  const Eigen::VectorXd& a = traj.spec.coefficients;
  for (Index k = 0; k < traj.sample_count(); ++k) {
    double rate = 0;
    for (Index j = 0; j < a.size(); ++j) rate -= 2.0 * a(j) / traj.g(k, j);
    out.push_back({traj.times[static_cast<std::size_t>(k)], traj.phase(k), rate});
  }
  return out;
}

}  // namespace lagweb
