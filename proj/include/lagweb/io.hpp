#pragma once

// File formats: frame JSON, solution JSON, report JSON, trajectory CSV and
// mesh CSV. JSON output is deterministic: keys sorted, floats printed with
// 17 significant digits, non-finite floats as null.

#include <filesystem>
#include <string>

#include <json.hpp>
#include "lagweb/bvpsolve.hpp"
#include "lagweb/webbing.hpp"

namespace lagweb::io {

using Json = nlohmann::json;
namespace fs = std::filesystem;

std::string dump_json(const Json& value);
std::string format_double(double x);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);
Json read_json(const fs::path& path);

Json frame_to_json(const ComplexMatrix& columns);
ComplexMatrix frame_from_json(const Json& value);
LagrangianFrame read_frame(const fs::path& path);

struct TrajectoryTable {
  std::vector<double> times;
  Eigen::MatrixXd g;
  Eigen::MatrixXd theta;
  Eigen::VectorXd phase;
  int dim() const { return static_cast<int>(g.cols()); }
};

std::string trajectory_csv(const GeodesicTrajectory& traj);
TrajectoryTable parse_trajectory_csv(const std::string& text);
TrajectoryTable read_trajectory_csv(const fs::path& path);
/// Attaches a stored table to a spec; the phase column is kept as stored.
GeodesicTrajectory trajectory_from_table(const GeodesicSpec& spec, const TrajectoryTable& table);

struct MeshTable {
  int n = 0;
  Eigen::MatrixXd params;     // param_dim x sphere_count
  std::vector<double> times;  // distinct times in file order
  ComplexMatrix points;       // n x (sphere_count * time_count), node = i * T + k
  Index sphere_count() const { return params.cols(); }
};

std::string mesh_csv(const CylinderMesh& mesh);
MeshTable parse_mesh_csv(const std::string& text);
MeshTable read_mesh_csv(const fs::path& path);

/// Rebuilds the analytic mesh from a mesh table and its trajectory table:
/// the t = 0 slice fixes Psi_0 and the semi-axes, the trajectory fixes the
/// coefficients by re-shooting theta(1). Throws VerificationFailed if the
/// rebuilt nodes disagree with the stored ones.
CylinderMesh rebuild_mesh(const MeshTable& mesh, const TrajectoryTable& trajectory,
                          double node_tolerance = 1e-9);

Json solution_json(const BvpSolution& solution, const std::string& trajectory_csv_name);
/// Spec and trajectory from a solution file and the CSV it references.
GeodesicTrajectory load_solution(const fs::path& path);

Json report_json(const MeshReport& report);

}  // namespace lagweb::io
