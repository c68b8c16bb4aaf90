#include "lagweb/webbing.hpp"

#include <algorithm>
#include <numbers>

#include "lagweb/sampling.hpp"

namespace lagweb {
namespace {

constexpr std::complex<double> kI(0, 1);

Eigen::Vector3d lat_long_point(double polar, double azimuth) {
  return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth),
          std::cos(polar)};
}

void fill_tangents(SphereSampling& s) {
  const int n = s.n;
  s.tangents.resize(n, static_cast<Index>(n - 1) * s.count());
  for (Index i = 0; i < s.count(); ++i) {
    auto basis = s.tangents.middleCols(i * (n - 1), n - 1);
    switch (s.kind) {
      case SphereGrid::Circle: {
        const double psi = s.params(0, i);
        basis.col(0) << -std::sin(psi), std::cos(psi);
        break;
      }
      case SphereGrid::LatLong: {
        const double polar = s.params(0, i);
        const double azimuth = s.params(1, i);
        basis.col(0) << std::cos(polar) * std::cos(azimuth),
            std::cos(polar) * std::sin(azimuth), -std::sin(polar);
        basis.col(1) << -std::sin(polar) * std::sin(azimuth),
            std::sin(polar) * std::cos(azimuth), 0.0;
        break;
      }
      case SphereGrid::QuasiRandom: {
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(s.points.col(i))
                                      .householderQ();
        basis = q.rightCols(n - 1);
        Eigen::MatrixXd full(n, n);
        full << basis, s.points.col(i);
        if (full.determinant() < 0) basis.col(0) *= -1;
        break;
      }
    }
  }
}

void fill_points(SphereSampling& s) {
  s.points.resize(s.n, s.params.cols());
  for (Index i = 0; i < s.params.cols(); ++i) {
    switch (s.kind) {
      case SphereGrid::Circle:
        s.points.col(i) << std::cos(s.params(0, i)), std::sin(s.params(0, i));
        break;
      case SphereGrid::LatLong:
        s.points.col(i) = lat_long_point(s.params(0, i), s.params(1, i));
        break;
      case SphereGrid::QuasiRandom:
        s.points.col(i) = s.params.col(i).normalized();
        break;
    }
  }
}

SphereGrid grid_kind(int n) {
  if (n == 2) return SphereGrid::Circle;
  if (n == 3) return SphereGrid::LatLong;
  return SphereGrid::QuasiRandom;
}

std::vector<Index> time_grid(const GeodesicTrajectory& traj, int stride) {
  if (stride < 1) throw Error(ErrorKind::InvalidArgument, "time stride must be positive");
  const Index last = traj.sample_count() - 1;
  std::vector<Index> out;
  for (Index k = 0; k < last; k += stride) out.push_back(k);
  out.push_back(last);
  return out;
}

void orient(CylinderMesh& mesh) {
  const std::complex<double> omega = mesh.tangent_frame(0, 0).determinant();
  if (omega.imag() == 0) {
    throw Error(ErrorKind::DegenerateFrame, "tangent frame at the first node is degenerate");
  }
  mesh.orientation = omega.imag() > 0 ? 1 : -1;
}

}  // namespace

LevelSetChart level_set_chart(const Eigen::VectorXd& a, double c) {
  if (!(c < 0)) {
    throw Error(ErrorKind::SignError, "level must be negative, got " + std::to_string(c), c, 0);
  }
  if (a.size() == 0 || !(a.maxCoeff() < 0)) {
    throw Error(ErrorKind::SignError, "all coefficients must be negative",
                a.size() ? a.maxCoeff() : 0.0, 0);
  }
  return {a, c, (c * a.cwiseInverse()).cwiseSqrt()};
}

SphereSampling sphere_sampling(int n, int resolution, int offset) {
  if (n < 2) {
    throw Error(ErrorKind::InvalidArgument,
                "cylinders need n >= 2 (the cross-section S^0 is not supported)");
  }
  SphereSampling s;
  s.n = n;
  s.kind = grid_kind(n);
  switch (s.kind) {
    case SphereGrid::Circle: {
      const int m = resolution > 0 ? resolution : 128;
      s.params.resize(1, m);
      for (int i = 0; i < m; ++i) s.params(0, i) = 2 * std::numbers::pi * i / m;
      break;
    }
    case SphereGrid::LatLong: {
      s.cols = resolution > 0 ? resolution : 64;
      s.rows = std::max(2, s.cols / 2);
      s.params.resize(2, static_cast<Index>(s.rows) * s.cols);
      Index k = 0;
      for (int r = 0; r < s.rows; ++r) {
        for (int c = 0; c < s.cols; ++c, ++k) {
          s.params(0, k) = std::numbers::pi * (r + 0.5) / s.rows;
          s.params(1, k) = 2 * std::numbers::pi * c / s.cols;
        }
      }
      break;
    }
    case SphereGrid::QuasiRandom:
      s.params = halton_sphere_points(n, resolution > 0 ? resolution : 4096, offset);
      break;
  }
  fill_points(s);
  fill_tangents(s);
  return s;
}

SphereSampling sphere_sampling_from_params(int n, const Eigen::MatrixXd& params) {
  SphereSampling s;
  s.n = n;
  s.kind = grid_kind(n);
  const Index expected = s.kind == SphereGrid::Circle ? 1 : s.kind == SphereGrid::LatLong ? 2 : n;
  if (params.rows() != expected || params.cols() == 0) {
    throw Error(ErrorKind::ParseError, "sphere parameters have the wrong shape");
  }
  s.params = params;
  if (s.kind == SphereGrid::LatLong) {
    std::vector<double> polar(params.row(0).data(), params.row(0).data() + params.cols());
    std::sort(polar.begin(), polar.end());
    s.rows = static_cast<int>(std::unique(polar.begin(), polar.end()) - polar.begin());
    s.cols = static_cast<int>(params.cols() / s.rows);
  }
  fill_points(s);
  fill_tangents(s);
  return s;
}

ComplexMatrix lift_rate(const GeodesicTrajectory& traj, Index sample) {
  const Index n = traj.dim();
  const Eigen::VectorXd& a = traj.spec.coefficients;
  const double tan_phase = std::tan(traj.phase(sample));
  ComplexVector scale(n);
  for (Index j = 0; j < n; ++j) {
    const double g = traj.g(sample, j);
    const double root = std::sqrt(g);
    const double dg = -4.0 * a(j) * tan_phase;
    const double dtheta = -2.0 * a(j) / g;
    scale(j) = (dg / (2 * root) + kI * (root * dtheta)) * std::polar(1.0, traj.theta(sample, j));
  }
  return traj.spec.initial_lift() * scale.asDiagonal();
}

ComplexMatrix CylinderMesh::tangent_frame(Index sphere_index, Index time_index) const {
  const int n = dim();
  const auto& lift = lifts[static_cast<std::size_t>(time_index)];
  ComplexMatrix frame(n, n);
  const auto basis = sphere.tangent_basis(sphere_index);
  for (int m = 0; m < n - 1; ++m) {
    frame.col(m) = lift * chart.semi_axes.cwiseProduct(basis.col(m)).cast<std::complex<double>>();
  }
  frame.col(n - 1) = rates[static_cast<std::size_t>(time_index)] *
                     chart(sphere.points.col(sphere_index)).cast<std::complex<double>>();
  return frame;
}

CylinderMesh cylinder_mesh(const GeodesicTrajectory& traj, double level, int sphere_resolution,
                           int time_stride) {
  return cylinder_mesh(traj, level, sphere_sampling(traj.dim(), sphere_resolution), time_stride);
}

CylinderMesh cylinder_mesh(const GeodesicTrajectory& traj, double level, SphereSampling sphere,
                           int time_stride) {
  const int n = traj.dim();
  if (sphere.n != n) throw Error(ErrorKind::InvalidArgument, "sphere dimension mismatch");
  CylinderMesh mesh{traj,
                    level_set_chart(traj.spec.coefficients, level),
                    std::move(sphere),
                    time_grid(traj, time_stride),
                    {},
                    {},
                    {},
                    1};
  for (Index k : mesh.time_samples) {
    mesh.lifts.push_back(horizontal_lift(traj, k));
    mesh.rates.push_back(lift_rate(traj, k));
  }
  mesh.points.resize(n, mesh.node_count());
  for (Index i = 0; i < mesh.sphere.count(); ++i) {
    const ComplexVector x = mesh.chart(mesh.sphere.points.col(i)).cast<std::complex<double>>();
    for (Index k = 0; k < mesh.time_count(); ++k) {
      mesh.points.col(mesh.node(i, k)) = mesh.lifts[static_cast<std::size_t>(k)] * x;
    }
  }
  orient(mesh);

  const double start = boundary_defect(mesh, traj.spec.base, 0);
  const double end =
      boundary_defect(mesh, horizontal_frame(traj, traj.sample_count() - 1), mesh.time_count() - 1);
  const double worst = std::max(start, end);
  if (!(worst < tol::kBoundary)) {
    throw Error(ErrorKind::InconsistentBoundary,
                "boundary slice leaves its endpoint subspace by " + std::to_string(worst), worst,
                tol::kBoundary);
  }
  return mesh;
}

CylinderMesh rescaled(const CylinderMesh& mesh, double s) {
  CylinderMesh out = mesh;
  out.chart.semi_axes *= s;
  out.chart.level *= s * s;
  out.points *= s;
  return out;
}

double boundary_defect(const CylinderMesh& mesh, const LagrangianFrame& frame, Index time_index) {
  double worst = 0;
  for (Index i = 0; i < mesh.sphere.count(); ++i) {
    worst = std::max(worst, frame.normal_defect(mesh.points.col(mesh.node(i, time_index))));
  }
  return worst;
}

SlagReport verify_slag(const CylinderMesh& mesh) {
  SlagReport report{0, 0, std::numeric_limits<double>::infinity()};
  for (Index i = 0; i < mesh.sphere.count(); ++i) {
    for (Index k = 0; k < mesh.time_count(); ++k) {
      const ComplexMatrix frame = mesh.tangent_frame(i, k);
      const Eigen::MatrixXd omega = (frame.adjoint() * frame).imag();
      report.max_omega = std::max(report.max_omega, max_abs(omega));
      const std::complex<double> volume = double(mesh.orientation) * frame.determinant();
      const double scale = frame.colwise().norm().prod();
      if (!(std::abs(volume) > 1e-14 * scale)) {
        throw Error(ErrorKind::DegenerateFrame,
                    "tangent frame is rank-deficient at node " + std::to_string(mesh.node(i, k)),
                    std::abs(volume) / scale, 1e-14);
      }
      report.max_re_omega = std::max(report.max_re_omega, std::abs(volume.real()));
      report.min_im_omega = std::min(report.min_im_omega, volume.imag());
    }
  }
  return report;
}

double euler_angle(const ComplexVector& point, const ComplexMatrix& tangents) {
  const double norm = point.norm();
  if (!(norm >= tol::kOriginNorm)) {
    throw Error(ErrorKind::OriginNode, "node at the origin", norm, tol::kOriginNorm);
  }
  const Eigen::MatrixXd span = realify(tangents);
  const Eigen::VectorXd x = realify(point);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(span);
  const Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(span.rows(), span.cols());
  const Eigen::VectorXd along = q * (q.transpose() * x);
  return std::atan2((x - along).norm(), along.norm());
}

double euler_transversality(const CylinderMesh& mesh) {
  double worst = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < mesh.sphere.count(); ++i) {
    for (Index k = 0; k < mesh.time_count(); ++k) {
      worst = std::min(worst,
                       euler_angle(mesh.points.col(mesh.node(i, k)), mesh.tangent_frame(i, k)));
    }
  }
  return worst;
}

std::vector<CylinderMesh> webbing_family(const GeodesicTrajectory& traj,
                                         std::vector<double> levels, int sphere_resolution,
                                         int time_stride) {
  std::stable_sort(levels.begin(), levels.end(),
                   [](double x, double y) { return std::abs(x) > std::abs(y); });
  std::vector<CylinderMesh> out;
  out.reserve(levels.size());
  for (double c : levels) out.push_back(cylinder_mesh(traj, c, sphere_resolution, time_stride));
  return out;
}

std::vector<CylinderMesh> webbing_family_scales(const GeodesicTrajectory& traj,
                                                std::vector<double> scales,
                                                int sphere_resolution, int time_stride) {
  std::vector<double> levels;
  levels.reserve(scales.size());
  for (double s : scales) {
    if (!(s > 0)) throw Error(ErrorKind::SignError, "scales must be positive", s, 0);
    levels.push_back(-s * s);
  }
  return webbing_family(traj, std::move(levels), sphere_resolution, time_stride);
}

FluxReport relflux(const GeodesicTrajectory& traj, double b0, double b1,
                   const FluxOptions& options) {
  if (!(b0 <= b1 && b1 < 0)) {
    throw Error(ErrorKind::SignError, "need b0 <= b1 < 0", b1, 0);
  }
  if (options.level_count < 2 && b0 < b1) {
    throw Error(ErrorKind::InvalidArgument, "need at least two levels for a non-empty interval");
  }
  const Eigen::VectorXd& a = traj.spec.coefficients;
  level_set_chart(a, b1);
  const SphereSampling sphere = sphere_sampling(traj.dim(), options.sphere_resolution);
  const std::vector<Index> samples = time_grid(traj, options.time_stride);
  std::vector<ComplexMatrix> lifts, rates;
  for (Index k : samples) {
    lifts.push_back(horizontal_lift(traj, k));
    rates.push_back(lift_rate(traj, k));
  }

  FluxReport report;
  const int count = b0 < b1 ? options.level_count : 1;
  for (int l = 0; l < count; ++l) {
    const double c = count == 1 ? b0 : b0 + (b1 - b0) * l / (count - 1);
    const double dc = 1e-4 * std::abs(c);
    const LevelSetChart chart = level_set_chart(a, c);
    const LevelSetChart up = level_set_chart(a, std::min(c + dc, -1e-300));
    const LevelSetChart down = level_set_chart(a, c - dc);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0;
    for (Index i = 0; i < sphere.count(); ++i) {
      const auto p = sphere.points.col(i);
      const ComplexVector dx =
          ((up(p) - down(p)) / (2 * dc)).cast<std::complex<double>>();
      const ComplexVector x = chart(p).cast<std::complex<double>>();
      // u(p, 1) = int_0^1 omega(v, d Phi / dt) dt, trapezoid on the time grid.
      double u = 0;
      double prev = 0;
      for (std::size_t k = 0; k < samples.size(); ++k) {
        const ComplexVector v = lifts[k] * dx;
        const ComplexVector dphi = rates[k] * x;
        const double integrand = FlatCalabiYau::omega(v, dphi);
        if (k > 0) {
          const double dt = traj.times[static_cast<std::size_t>(samples[k])] -
                            traj.times[static_cast<std::size_t>(samples[k - 1])];
          u += 0.5 * dt * (prev + integrand);
        }
        prev = integrand;
      }
      lo = std::min(lo, u);
      hi = std::max(hi, u);
      sum += u;
    }
    const double spread = hi - lo;
    if (!(spread <= tol::kFluxSpreadError)) {
      throw Error(ErrorKind::InconsistentBoundary,
                  "boundary primitive varies by " + std::to_string(spread) + " at level " +
                      std::to_string(c),
                  spread, tol::kFluxSpreadError);
    }
    report.levels.push_back(c);
    report.boundary_values.push_back(sum / static_cast<double>(sphere.count()));
    report.spreads.push_back(spread);
  }
  double integral = 0;
  for (std::size_t l = 1; l < report.levels.size(); ++l) {
    integral += 0.5 * (report.levels[l] - report.levels[l - 1]) *
                (report.boundary_values[l] + report.boundary_values[l - 1]);
  }
  report.relflux = -integral;
  return report;
}

double harmonic_residual(const CylinderMesh& mesh, bool squared) {
  if (mesh.dim() != 2) {
    throw Error(ErrorKind::InvalidArgument, "harmonic residual is defined for n = 2 meshes");
  }
  const Index m = mesh.sphere.count();
  const Index nt = mesh.time_count();
  if (nt < 3 || m < 3) {
    throw Error(ErrorKind::InvalidArgument, "grid too small for central differences");
  }
  const double dpsi = 2 * std::numbers::pi / static_cast<double>(m);
  std::vector<double> t(static_cast<std::size_t>(nt));
  for (Index k = 0; k < nt; ++k) t[static_cast<std::size_t>(k)] = mesh.time(k);
  auto u = [&](Index k) {
    const double tk = t[static_cast<std::size_t>(k)];
    return squared ? tk * tk : tk;
  };
  // u depends on t only: u_psi = 0, u_t by second-order differences.
  std::vector<double> u_t(static_cast<std::size_t>(nt));
  for (Index k = 0; k < nt; ++k) {
    double d;
    if (k == 0) {
      d = (-3 * u(0) + 4 * u(1) - u(2)) / (t[2] - t[0]);
    } else if (k == nt - 1) {
      d = (3 * u(k) - 4 * u(k - 1) + u(k - 2)) / (t[static_cast<std::size_t>(k)] - t[static_cast<std::size_t>(k - 2)]);
    } else {
      d = (u(k + 1) - u(k - 1)) / (t[static_cast<std::size_t>(k + 1)] - t[static_cast<std::size_t>(k - 1)]);
    }
    u_t[static_cast<std::size_t>(k)] = d;
  }

  // Flux components sqrt(D) g^{ij} du_j and sqrt(D) at every node.
  Eigen::MatrixXd flux_psi(m, nt), flux_t(m, nt), root(m, nt);
  for (Index i = 0; i < m; ++i) {
    for (Index k = 0; k < nt; ++k) {
      const ComplexMatrix frame = mesh.tangent_frame(i, k);
      const double e = frame.col(0).squaredNorm();
      const double f = FlatCalabiYau::metric(frame.col(0), frame.col(1));
      const double g = frame.col(1).squaredNorm();
      const double det = e * g - f * f;
      if (!(det >= tol::kDegenerateMetric)) {
        throw Error(ErrorKind::DegenerateMetric, "induced metric degenerates", det,
                    tol::kDegenerateMetric);
      }
      const double sq = std::sqrt(det);
      const double du = u_t[static_cast<std::size_t>(k)];
      flux_psi(i, k) = sq * (-f / det) * du;
      flux_t(i, k) = sq * (e / det) * du;
      root(i, k) = sq;
    }
  }
  double worst = 0;
  for (Index i = 0; i < m; ++i) {
    const Index ip = (i + 1) % m;
    const Index im = (i + m - 1) % m;
    for (Index k = 1; k + 1 < nt; ++k) {
      const double div =
          (flux_psi(ip, k) - flux_psi(im, k)) / (2 * dpsi) +
          (flux_t(i, k + 1) - flux_t(i, k - 1)) /
              (t[static_cast<std::size_t>(k + 1)] - t[static_cast<std::size_t>(k - 1)]);
      worst = std::max(worst, std::abs(div / root(i, k)));
    }
  }
  return worst;
}

MeshReport mesh_report(const CylinderMesh& mesh) {
  MeshReport report;
  report.slag = verify_slag(mesh);
  report.min_euler_angle = euler_transversality(mesh);
  if (mesh.dim() == 2 && mesh.time_count() >= 3) report.harmonic_residual = harmonic_residual(mesh);
  return report;
}

}  // namespace lagweb
