#pragma once

// Cylinders of level sets of a geodesic's Hamiltonian. For h(x) = sum a_j x_j^2
// with all a_j < 0 and a level c < 0, the level set is the ellipsoid
// x = kappa(p) = (sqrt(c / a_j) p_j)_j over the unit sphere, and
//
//   Phi_c(p, t) = Psi_t(kappa(p))
//
// is an imaginary special Lagrangian immersion of S^{n-1} x [0, 1] whose
// boundary circles lie in Lambda_0 and Lambda_1. All tangents are analytic.

#include <optional>
#include <vector>

#include "lagweb/geoflow.hpp"

namespace lagweb {

struct LevelSetChart {
  Eigen::VectorXd coefficients;  // a_j < 0
  double level = -1;             // c < 0
  Eigen::VectorXd semi_axes;     // sqrt(c / a_j)

  Eigen::VectorXd operator()(const Eigen::VectorXd& unit) const {
    return semi_axes.cwiseProduct(unit);
  }
};

LevelSetChart level_set_chart(const Eigen::VectorXd& coefficients, double level);

enum class SphereGrid { Circle, LatLong, QuasiRandom };

/// Sample points on S^{n-1} with a real tangent basis at each point.
/// n = 2: uniform angles psi. n = 3: latitude-longitude grid, latitudes offset
/// half a cell from the poles. n >= 4: Halton unit vectors with an orthonormal
/// completion as tangent basis.
struct SphereSampling {
  int n = 2;
  SphereGrid kind = SphereGrid::Circle;
  int rows = 0;               // LatLong: latitude count
  int cols = 0;               // LatLong: longitude count
  Eigen::MatrixXd params;     // param_dim x count (psi | polar, azimuth | p)
  Eigen::MatrixXd points;     // n x count
  Eigen::MatrixXd tangents;   // n x (n-1)*count, block per point

  Index count() const { return points.cols(); }
  auto tangent_basis(Index i) const { return tangents.middleCols(i * (n - 1), n - 1); }
};

/// resolution 0 selects the default for the dimension (128, 64x32, 4096).
/// `offset` shifts the Halton sequence used for n >= 4.
SphereSampling sphere_sampling(int n, int resolution = 0, int offset = 0);
/// Rebuilds a sampling (with tangents) from stored parameters.
SphereSampling sphere_sampling_from_params(int n, const Eigen::MatrixXd& params);

struct CylinderMesh {
  GeodesicTrajectory trajectory;
  LevelSetChart chart;
  SphereSampling sphere;
  std::vector<Index> time_samples;     // indices into the trajectory grid
  std::vector<ComplexMatrix> lifts;    // Psi_t per mesh time
  std::vector<ComplexMatrix> rates;    // d/dt Psi_t per mesh time
  ComplexMatrix points;                // n x node_count
  int orientation = 1;                 // sign making Im Omega > 0

  int dim() const { return sphere.n; }
  Index time_count() const { return static_cast<Index>(time_samples.size()); }
  Index node_count() const { return sphere.count() * time_count(); }
  Index node(Index sphere_index, Index time_index) const {
    return sphere_index * time_count() + time_index;
  }
  double time(Index time_index) const {
    return trajectory.times[static_cast<std::size_t>(time_samples[static_cast<std::size_t>(time_index)])];
  }
  /// Tangent vectors at a node: sphere directions first, time direction last.
  ComplexMatrix tangent_frame(Index sphere_index, Index time_index) const;
};

/// Analytic d/dt of the lifted frame: columns
/// [g'_j / (2 sqrt g_j) + i sqrt(g_j) theta'_j] e^{i theta_j} Psi_0(e_j), with
/// g' = -4 a tan(phase) and theta' = -2 a / g, phase taken from the
/// trajectory's phase column.
ComplexMatrix lift_rate(const GeodesicTrajectory& traj, Index sample);

CylinderMesh cylinder_mesh(const GeodesicTrajectory& traj, double level,
                           int sphere_resolution = 0, int time_stride = 1);
CylinderMesh cylinder_mesh(const GeodesicTrajectory& traj, double level,
                           SphereSampling sphere, int time_stride = 1);

/// Same nodes scaled by s (level becomes s^2 c).
CylinderMesh rescaled(const CylinderMesh& mesh, double s);

/// Sup-norm of Im(F^* Phi) over the nodes of one time slice.
double boundary_defect(const CylinderMesh& mesh, const LagrangianFrame& frame,
                       Index time_index);

struct SlagReport {
  double max_omega = 0;
  double max_re_omega = 0;
  double min_im_omega = 0;
};

SlagReport verify_slag(const CylinderMesh& mesh);

/// Angle between the Euler vector `point` and the real span of `tangents`.
double euler_angle(const ComplexVector& point, const ComplexMatrix& tangents);
double euler_transversality(const CylinderMesh& mesh);

/// Meshes for the given levels, ordered by |c| decreasing (towards the origin).
std::vector<CylinderMesh> webbing_family(const GeodesicTrajectory& traj,
                                         std::vector<double> levels,
                                         int sphere_resolution = 0, int time_stride = 1);
/// The family Phi(p, t, s) = s chi(p, t) with chi the c = -1 cylinder.
std::vector<CylinderMesh> webbing_family_scales(const GeodesicTrajectory& traj,
                                                std::vector<double> scales,
                                                int sphere_resolution = 0,
                                                int time_stride = 1);

struct FluxOptions {
  int level_count = 11;
  int sphere_resolution = 32;
  int time_stride = 1;
};

struct FluxReport {
  std::vector<double> levels;
  std::vector<double> boundary_values;  // A_c
  std::vector<double> spreads;          // max - min of u(p, 1) over p
  double relflux = 0;
};

/// Relative Lagrangian flux of the level-set family over [b0, b1].
FluxReport relflux(const GeodesicTrajectory& traj, double b0, double b1,
                   const FluxOptions& options = {});

/// Interior sup-norm of the discrete Laplace-Beltrami operator applied to
/// u = t (or u = t^2 when `squared`) on an n = 2 mesh.
double harmonic_residual(const CylinderMesh& mesh, bool squared = false);

struct MeshReport {
  SlagReport slag;
  double min_euler_angle = 0;
  std::optional<double> harmonic_residual;
};

MeshReport mesh_report(const CylinderMesh& mesh);

}  // namespace lagweb
