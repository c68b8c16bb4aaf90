#include "lagweb/bvpsolve.hpp"

#include <limits>
#include <numbers>

namespace lagweb {
namespace {

// theta(1) for coefficients a from the reduced system.
Eigen::VectorXd endpoint_theta(const Eigen::VectorXd& a, double phase0,
                               const IntegratorConfig& config) {
  const Index n = a.size();
  Eigen::VectorXd y(2 * n);
  y.head(n).setOnes();
  y.tail(n).setZero();
  auto field = [&](double, const Eigen::VectorXd& state) {
    return geodesic_rhs(a, phase0, state);
  };
  const auto sampled = integrate_rk4<double>(field, y, 0.0, 1.0, config);
  const Eigen::VectorXd& last = sampled.states.back();
  geodesic_rhs(a, phase0, last);  // rejects an endpoint outside the Grassmannian
  return last.tail(n);
}

bool recoverable(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::NoConvergence:
    case ErrorKind::PhaseBlowup:
    case ErrorKind::MetricCollapse:
    case ErrorKind::SingularJacobian:
    case ErrorKind::NonFiniteState:
      return true;
    default:
      return false;
  }
}

struct ShootingProblem {
  double phase0 = 0;
  Index n = 0;
  std::vector<std::vector<Index>> groups;  // one unknown per group
  Eigen::VectorXd targets;                 // target theta(1) per index
  double lower = -std::numeric_limits<double>::infinity();
  double upper = 0;
};

struct ContinuationResult {
  Eigen::VectorXd a;
  NewtonResult<double> final_newton;
  int steps = 0;
};

Eigen::VectorXd expand(const ShootingProblem& p, const Eigen::VectorXd& x) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(p.n);
  for (std::size_t b = 0; b < p.groups.size(); ++b) {
    for (Index j : p.groups[b]) a(j) = x(static_cast<Index>(b));
  }
  return a;
}

Eigen::VectorXd group_residual(const ShootingProblem& p, const Eigen::VectorXd& x, double s,
                               const IntegratorConfig& config) {
  const Eigen::VectorXd theta = endpoint_theta(expand(p, x), p.phase0, config);
  Eigen::VectorXd r(static_cast<Index>(p.groups.size()));
  for (std::size_t b = 0; b < p.groups.size(); ++b) {
    double sum = 0;
    for (Index j : p.groups[b]) sum += theta(j) - s * p.targets(j);
    r(static_cast<Index>(b)) = sum / static_cast<double>(p.groups[b].size());
  }
  return r;
}

// Natural-parameter continuation in s for targets s * beta, s in [s0, 1].
ContinuationResult continuation_solve(const ShootingProblem& p, const BvpConfig& config) {
  const Index unknowns = static_cast<Index>(p.groups.size());
  Eigen::VectorXd x(unknowns);
  for (std::size_t b = 0; b < p.groups.size(); ++b) {
    double sum = 0;
    for (Index j : p.groups[b]) sum += p.targets(j);
    // Small-coefficient linearization: theta_j(1) ~ -2 a_j.
    x(static_cast<Index>(b)) =
        -config.continuation_start * sum / static_cast<double>(p.groups[b].size()) / 2;
  }
  const std::function<void(Eigen::VectorXd&)> project = [&](Eigen::VectorXd& v) {
    v = v.cwiseMax(p.lower).cwiseMin(p.upper);
  };
  auto solve_at = [&](double s, const Eigen::VectorXd& guess) {
    NewtonConfig newton = config.newton;
    if (s < 1) newton.residual_tolerance = std::max(newton.residual_tolerance,
                                                    config.intermediate_tolerance);
    auto residual = [&](const Eigen::VectorXd& v) {
      return group_residual(p, v, s, config.integrator);
    };
    return newton_solve<double>(residual, guess, newton, project);
  };

  double s = 0;
  double next = std::min(1.0, config.continuation_start);
  double ds = config.initial_step;
  int successes = 0;
  int steps = 0;
  NewtonResult<double> last;
  for (;;) {
    try {
      last = solve_at(next, x);
      x = last.root;
      s = next;
      ++steps;
      if (s >= 1) break;
      if (++successes >= 2) {
        ds *= 2;
        successes = 0;
      }
    } catch (const Error& e) {
      if (!recoverable(e)) throw;
      ds /= 2;
      successes = 0;
      if (ds < config.min_step) {
        throw Error(ErrorKind::NoConvergence,
                    "continuation stalled; last converged parameter s = " + std::to_string(s) +
                        " (" + e.what() + ")",
                    s, 1.0);
      }
      if (s == 0) {
        // The starting point itself failed; retry closer to the trivial solution.
        next = std::max(next / 2, config.min_step);
        x *= 0.5;
        continue;
      }
    }
    next = std::min(1.0, s + ds);
  }
  return {expand(p, x), std::move(last), steps};
}

BvpSolution finish(const LagrangianFrame& lambda0, PairSpectrum spectrum,
                   const Eigen::VectorXd& a, const Eigen::VectorXd& targets,
                   const NewtonResult<double>* newton, int steps, int maslov,
                   bool experimental, const BvpConfig& config) {
  GeodesicTrajectory traj = geodesic_ivp(
      GeodesicSpec::make(lambda0, spectrum.adapted_basis, a), config.integrator);
  const Eigen::VectorXd theta1 = traj.theta.row(traj.sample_count() - 1).transpose();
  const double residual = targets.size() ? (theta1 - targets).cwiseAbs().maxCoeff() : 0.0;
  BvpSolution out{std::move(spectrum), a, std::move(traj), residual, 1.0, steps, {}, maslov,
                  experimental};
  if (newton != nullptr) {
    out.jacobian_condition = newton->jacobian_condition;
    out.newton_history = newton->residual_history;
  }
  return out;
}

}  // namespace

AprioriBounds apriori_bounds(double phi0, double phi1) {
  constexpr double half_pi = std::numbers::pi / 2;
  if (!(phi0 > -half_pi && phi1 < half_pi && phi0 <= phi1)) {
    throw Error(ErrorKind::BadPhaseWindow,
                "need -pi/2 < phi0 <= phi1 < pi/2, got [" + std::to_string(phi0) + ", " +
                    std::to_string(phi1) + "]",
                phi1 - phi0, 0.0);
  }
  const double n_bound = phi1 <= 0 ? 1.0 : std::exp(std::numbers::pi * std::tan(phi1));
  return {phi0, phi1, n_bound, n_bound * (phi1 - phi0) / 2};
}

Eigen::VectorXd shooting_residual(const PairSpectrum& spectrum, const Eigen::VectorXd& a,
                                  const IntegratorConfig& config) {
  if (a.size() != spectrum.dim()) {
    throw Error(ErrorKind::InvalidArgument, "coefficient count does not match the pair");
  }
  const Eigen::VectorXd diff = endpoint_theta(a, spectrum.phase0, config) - spectrum.beta;
  Eigen::VectorXd out(diff.size());
  for (const auto& block : spectrum.blocks) {
    double mean = 0;
    for (Index j : block) mean += diff(j);
    mean /= static_cast<double>(block.size());
    for (Index j : block) out(j) = mean;
  }
  return out;
}

BvpSolution solve_bvp_maslov0(const LagrangianFrame& lambda0, const LagrangianFrame& lambda1,
                              const BvpConfig& config) {
  PairSpectrum spectrum = pair_decomposition(lambda0, lambda1);
  const MaslovIndex m = maslov_index(spectrum);
  if (m.m != 0) {
    throw Error(ErrorKind::MaslovNonzero,
                "Maslov index is " + std::to_string(m.m) + ", expected 0", m.m, 0.0);
  }
  const Index n = spectrum.dim();

  ShootingProblem problem;
  problem.phase0 = spectrum.phase0;
  problem.n = n;
  problem.targets = spectrum.beta;
  for (std::size_t b = 0; b < spectrum.blocks.size(); ++b) {
    if (2 * spectrum.block_beta(b) > tol::kTransverse) problem.groups.push_back(spectrum.blocks[b]);
  }
  if (problem.groups.empty()) {
    return finish(lambda0, std::move(spectrum), Eigen::VectorXd::Zero(n),
                  Eigen::VectorXd::Zero(n), nullptr, 0, 0, false, config);
  }
  const AprioriBounds bounds = apriori_bounds(spectrum.phase0, spectrum.phase1);
  problem.lower = -bounds.M - 1;
  problem.upper = 0;

  ContinuationResult solved = continuation_solve(problem, config);
  Eigen::VectorXd targets = spectrum.beta;
  return finish(lambda0, std::move(spectrum), solved.a, targets, &solved.final_newton,
                solved.steps, 0, false, config);
}

GeodesicTrajectory reverse_trajectory(const GeodesicTrajectory& traj) {
  const Index count = traj.sample_count();
  const Index last = count - 1;
  const Index n = traj.dim();
  const ComplexMatrix end_lift = horizontal_lift(traj, last);
  ComplexMatrix unit = end_lift;
  for (Index j = 0; j < n; ++j) unit.col(j) /= std::sqrt(traj.g(last, j));
  const LagrangianFrame base = make_frame(traj.spec.base.ambient(), unit);
  // make_frame may only rescale columns here; flipping one would break the lifting.
  const Eigen::VectorXd g1 = traj.g.row(last).transpose();
  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(n, n);
  if ((base.columns().col(0) - unit.col(0)).norm() > 1e-6) basis(0, 0) = -1;
  const Eigen::VectorXd a = -traj.spec.coefficients.cwiseQuotient(g1);
  GeodesicTrajectory out{GeodesicSpec::make(base, basis, a), traj.times,
                         Eigen::MatrixXd(count, n), Eigen::MatrixXd(count, n),
                         Eigen::VectorXd(count)};
  for (Index k = 0; k < count; ++k) {
    out.g.row(k) = traj.g.row(last - k).cwiseQuotient(g1.transpose());
    out.theta.row(k) = traj.theta.row(last - k) - traj.theta.row(last);
    out.phase(k) = out.spec.phase0 + out.theta.row(k).sum();
  }
  return out;
}

BvpSolution solve_geodesic(const LagrangianFrame& lambda0, const LagrangianFrame& lambda1,
                           const BvpConfig& config, bool experimental) {
  PairSpectrum spectrum = pair_decomposition(lambda0, lambda1);
  const MaslovIndex m = maslov_index(spectrum);
  const int n = spectrum.dim();
  if (m.m == 0) return solve_bvp_maslov0(lambda0, lambda1, config);

  if (m.m == n && spectrum.transverse) {
    BvpSolution reversed = solve_bvp_maslov0(lambda1, lambda0, config);
    GeodesicTrajectory traj = reverse_trajectory(reversed.trajectory);
    const Eigen::VectorXd a = traj.spec.coefficients;
    // theta'(1) = -beta_rev, and beta = pi - beta_rev for a transverse pair.
    const double residual =
        (traj.theta.row(traj.sample_count() - 1).transpose() + reversed.spectrum.beta)
            .cwiseAbs()
            .maxCoeff();
    return BvpSolution{std::move(spectrum), a, std::move(traj), residual,
                       reversed.jacobian_condition, reversed.continuation_steps,
                       reversed.newton_history, m.m, false};
  }

  if (!experimental) {
    throw Error(ErrorKind::MaslovNonzero,
                "Maslov index is " + std::to_string(m.m) +
                    "; only 0 and n are supported without the experimental mode",
                m.m, 0.0);
  }

  // Experimental: subtract pi from the m largest angles so the targets sum to
  // the phase difference, then shoot with unconstrained signs.
  ShootingProblem problem;
  problem.phase0 = spectrum.phase0;
  problem.n = n;
  problem.targets = spectrum.beta;
  for (int k = 0; k < m.m; ++k) problem.targets(n - 1 - k) -= std::numbers::pi;
  for (Index j = 0; j < n; ++j) {
    if (std::abs(problem.targets(j)) > tol::kTransverse / 2) problem.groups.push_back({j});
  }
  problem.lower = -std::numeric_limits<double>::infinity();
  problem.upper = std::numeric_limits<double>::infinity();
  ContinuationResult solved = continuation_solve(problem, config);
  Eigen::VectorXd targets = problem.targets;
  return finish(lambda0, std::move(spectrum), solved.a, targets, &solved.final_newton,
                solved.steps, m.m, true, config);
}

}  // namespace lagweb
