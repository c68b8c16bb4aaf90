#include "lagweb/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace lagweb::io {
namespace {

void dump(const Json& v, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      // nlohmann's default object type is an ordered std::map, so keys come sorted.
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 2);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(v.begin(), v.end(), [](const Json& x) {
        return x.is_primitive();
      });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          dump(v[i], out, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump(v[i], out, indent + 2);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_double(v.get<double>());
      return;
    default:
      out += v.dump();
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, "not a number: '" + s + "'");
  }
  if (used != s.size()) throw Error(ErrorKind::ParseError, "not a number: '" + s + "'");
  return x;
}

// Rows of a numeric CSV with a header; returns the header fields.
std::vector<std::string> parse_csv(const std::string& text, std::vector<std::vector<double>>& rows) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "empty CSV");
  const auto header = split(line, ',');
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::ParseError, "CSV row has " + std::to_string(fields.size()) +
                                             " fields, header has " +
                                             std::to_string(header.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f));
    rows.push_back(std::move(row));
  }
  return header;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const Json& v) {
  Eigen::VectorXd out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = v[i].get<double>();
  return out;
}

Json real_matrix_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

Eigen::MatrixXd real_matrix_from_json(const Json& v) {
  const Index rows = static_cast<Index>(v.size());
  Eigen::MatrixXd out(rows, rows ? static_cast<Index>(v[0].size()) : 0);
  for (Index r = 0; r < rows; ++r) {
    if (static_cast<Index>(v[static_cast<std::size_t>(r)].size()) != out.cols()) {
      throw Error(ErrorKind::ParseError, "ragged matrix");
    }
    out.row(r) = vector_from_json(v[static_cast<std::size_t>(r)]).transpose();
  }
  return out;
}

std::string param_header(SphereGrid kind, int n) {
  switch (kind) {
    case SphereGrid::Circle:
      return "psi";
    case SphereGrid::LatLong:
      return "polar,azimuth";
    case SphereGrid::QuasiRandom: {
      std::string h;
      for (int j = 1; j <= n; ++j) h += (j > 1 ? ",p" : "p") + std::to_string(j);
      return h;
    }
  }
  return {};
}

}  // namespace

std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump_json(const Json& value) {
  std::string out;
  dump(value, out, 0);
  out += "\n";
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

Json frame_to_json(const ComplexMatrix& columns) {
  Json cols = Json::array();
  for (Index c = 0; c < columns.cols(); ++c) {
    Json col = Json::array();
    for (Index r = 0; r < columns.rows(); ++r) {
      col.push_back({{"re", columns(r, c).real()}, {"im", columns(r, c).imag()}});
    }
    cols.push_back(std::move(col));
  }
  return {{"n", columns.cols()}, {"columns", std::move(cols)}};
}

ComplexMatrix frame_from_json(const Json& value) {
  try {
    const int n = value.at("n").get<int>();
    const Json& cols = value.at("columns");
    if (n < 1 || cols.size() != static_cast<std::size_t>(n)) {
      throw Error(ErrorKind::ParseError, "frame needs n columns");
    }
    ComplexMatrix out(n, n);
    for (int c = 0; c < n; ++c) {
      const Json& col = cols[static_cast<std::size_t>(c)];
      if (col.size() != static_cast<std::size_t>(n)) {
        throw Error(ErrorKind::ParseError, "frame column needs n entries");
      }
      for (int r = 0; r < n; ++r) {
        const Json& z = col[static_cast<std::size_t>(r)];
        out(r, c) = {z.at("re").get<double>(), z.at("im").get<double>()};
      }
    }
    if (!out.allFinite()) throw Error(ErrorKind::NonFiniteEntry, "frame has non-finite entries");
    return out;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("bad frame JSON: ") + e.what());
  }
}

LagrangianFrame read_frame(const fs::path& path) {
  const ComplexMatrix raw = frame_from_json(read_json(path));
  return make_frame(FlatCalabiYau{static_cast<int>(raw.cols())}, raw);
}

std::string trajectory_csv(const GeodesicTrajectory& traj) {
  const int n = traj.dim();
  std::string out = "t";
  for (int j = 1; j <= n; ++j) out += ",g_" + std::to_string(j);
  for (int j = 1; j <= n; ++j) out += ",theta_" + std::to_string(j);
  out += ",phase\n";
  for (Index k = 0; k < traj.sample_count(); ++k) {
    out += format_double(traj.times[static_cast<std::size_t>(k)]);
    for (int j = 0; j < n; ++j) out += "," + format_double(traj.g(k, j));
    for (int j = 0; j < n; ++j) out += "," + format_double(traj.theta(k, j));
    out += "," + format_double(traj.phase(k)) + "\n";
  }
  return out;
}

TrajectoryTable parse_trajectory_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  const auto header = parse_csv(text, rows);
  if (header.size() < 4 || (header.size() - 2) % 2 != 0 || header.front() != "t" ||
      header.back() != "phase") {
    throw Error(ErrorKind::ParseError, "trajectory CSV header must be t,g_*,theta_*,phase");
  }
  const Index n = static_cast<Index>((header.size() - 2) / 2);
  const Index count = static_cast<Index>(rows.size());
  if (count < 2) throw Error(ErrorKind::ParseError, "trajectory CSV needs at least two rows");
  TrajectoryTable t{{}, Eigen::MatrixXd(count, n), Eigen::MatrixXd(count, n),
                    Eigen::VectorXd(count)};
  for (Index k = 0; k < count; ++k) {
    const auto& row = rows[static_cast<std::size_t>(k)];
    t.times.push_back(row[0]);
    for (Index j = 0; j < n; ++j) {
      t.g(k, j) = row[static_cast<std::size_t>(1 + j)];
      t.theta(k, j) = row[static_cast<std::size_t>(1 + n + j)];
    }
    t.phase(k) = row.back();
  }
  return t;
}

TrajectoryTable read_trajectory_csv(const fs::path& path) {
  return parse_trajectory_csv(read_text(path));
}

GeodesicTrajectory trajectory_from_table(const GeodesicSpec& spec, const TrajectoryTable& table) {
  if (table.dim() != spec.dim()) {
    throw Error(ErrorKind::ParseError, "trajectory dimension does not match the solution");
  }
  return {spec, table.times, table.g, table.theta, table.phase};
}

std::string mesh_csv(const CylinderMesh& mesh) {
  const int n = mesh.dim();
  std::string out = param_header(mesh.sphere.kind, n) + ",t";
  for (int j = 1; j <= n; ++j) {
    out += ",re_z" + std::to_string(j) + ",im_z" + std::to_string(j);
  }
  out += "\n";
  for (Index i = 0; i < mesh.sphere.count(); ++i) {
    std::string prefix;
    for (Index r = 0; r < mesh.sphere.params.rows(); ++r) {
      prefix += (r ? "," : "") + format_double(mesh.sphere.params(r, i));
    }
    for (Index k = 0; k < mesh.time_count(); ++k) {
      out += prefix + "," + format_double(mesh.time(k));
      const auto z = mesh.points.col(mesh.node(i, k));
      for (int j = 0; j < n; ++j) {
        out += "," + format_double(z(j).real()) + "," + format_double(z(j).imag());
      }
      out += "\n";
    }
  }
  return out;
}

MeshTable parse_mesh_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  const auto header = parse_csv(text, rows);
  const auto t_col = std::find(header.begin(), header.end(), "t");
  if (t_col == header.end()) throw Error(ErrorKind::ParseError, "mesh CSV has no t column");
  const std::size_t param_dim = static_cast<std::size_t>(t_col - header.begin());
  const std::size_t tail = header.size() - param_dim - 1;
  if (param_dim == 0 || tail < 4 || tail % 2 != 0) {
    throw Error(ErrorKind::ParseError, "mesh CSV header has the wrong shape");
  }
  MeshTable m;
  m.n = static_cast<int>(tail / 2);
  const std::size_t expected_params =
      m.n == 2 ? 1 : m.n == 3 ? 2 : static_cast<std::size_t>(m.n);
  if (param_dim != expected_params) {
    throw Error(ErrorKind::ParseError, "mesh CSV parameter columns do not match n");
  }
  // Rows are grouped by sphere point, each group running over the same times.
  std::size_t time_count = 0;
  while (time_count < rows.size() &&
         std::equal(rows[time_count].begin(), rows[time_count].begin() + param_dim,
                    rows[0].begin())) {
    ++time_count;
  }
  if (time_count == 0 || rows.size() % time_count != 0) {
    throw Error(ErrorKind::ParseError, "mesh CSV rows are not a sphere x time grid");
  }
  const Index sphere_count = static_cast<Index>(rows.size() / time_count);
  m.params.resize(static_cast<Index>(param_dim), sphere_count);
  m.points.resize(m.n, static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < time_count; ++k) m.times.push_back(rows[k][param_dim]);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t i = r / time_count;
    const std::size_t k = r % time_count;
    if (row[param_dim] != m.times[k]) {
      throw Error(ErrorKind::ParseError, "mesh CSV time grid differs between sphere points");
    }
    if (k == 0) {
      for (std::size_t p = 0; p < param_dim; ++p) {
        m.params(static_cast<Index>(p), static_cast<Index>(i)) = row[p];
      }
    }
    for (int j = 0; j < m.n; ++j) {
      m.points(j, static_cast<Index>(r)) = {row[param_dim + 1 + 2 * static_cast<std::size_t>(j)],
                                            row[param_dim + 2 + 2 * static_cast<std::size_t>(j)]};
    }
  }
  return m;
}

MeshTable read_mesh_csv(const fs::path& path) { return parse_mesh_csv(read_text(path)); }

CylinderMesh rebuild_mesh(const MeshTable& table, const TrajectoryTable& trajectory,
                          double node_tolerance) {
  const int n = table.n;
  if (trajectory.dim() != n) {
    throw Error(ErrorKind::ParseError, "mesh and trajectory dimensions differ");
  }
  SphereSampling sphere = sphere_sampling_from_params(n, table.params);
  const Index m = sphere.count();
  const Index time_count = static_cast<Index>(table.times.size());

  // Mesh times index into the trajectory grid; the last one is t = 1.
  std::vector<Index> samples;
  for (double t : table.times) {
    const auto it = std::find(trajectory.times.begin(), trajectory.times.end(), t);
    if (it == trajectory.times.end()) {
      throw Error(ErrorKind::VerificationFailed, "mesh time " + format_double(t) +
                                                     " is not on the trajectory grid");
    }
    samples.push_back(static_cast<Index>(it - trajectory.times.begin()));
  }
  if (samples.front() != 0) {
    throw Error(ErrorKind::VerificationFailed, "mesh does not start at t = 0");
  }
  int stride = samples.size() > 1 ? static_cast<int>(samples[1] - samples[0]) : 1;
  if (stride < 1) stride = 1;

  // t = 0 slice: z_i = Psi_0 K p_i. Least squares for the complex matrix Psi_0 K.
  ComplexMatrix start(n, m);
  for (Index i = 0; i < m; ++i) start.col(i) = table.points.col(i * time_count);
  const Eigen::MatrixXd p = sphere.points;
  const Eigen::MatrixXd normal = p * p.transpose();
  const Eigen::LDLT<Eigen::MatrixXd> normal_ldlt(normal);
  const ComplexMatrix rhs = p * start.transpose();
  ComplexMatrix scaled(n, n);  // Psi_0 K
  scaled.real() = normal_ldlt.solve(rhs.real().eval()).transpose();
  scaled.imag() = normal_ldlt.solve(rhs.imag().eval()).transpose();
  const Eigen::VectorXd axes = scaled.colwise().norm().transpose();
  if (!(axes.minCoeff() > 0)) {
    throw Error(ErrorKind::VerificationFailed, "t = 0 slice is degenerate");
  }
  const ComplexMatrix lift0 = scaled * axes.cwiseInverse().asDiagonal();
  const LagrangianFrame base = make_frame(FlatCalabiYau{n}, lift0);
  const Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(n, n);

  // Coefficients: re-shoot theta(1) with the same RK4 grid.
  const IntegratorConfig integrator{static_cast<int>(trajectory.times.size()) - 1};
  const Index last = static_cast<Index>(trajectory.times.size()) - 1;
  const Eigen::VectorXd theta1 = trajectory.theta.row(last).transpose();
  Eigen::VectorXd guess(n);
  for (int j = 0; j < n; ++j) {
    double integral = 0;
    for (Index k = 1; k <= last; ++k) {
      const double dt = trajectory.times[static_cast<std::size_t>(k)] -
                        trajectory.times[static_cast<std::size_t>(k - 1)];
      integral += 0.5 * dt * (1 / trajectory.g(k, j) + 1 / trajectory.g(k - 1, j));
    }
    guess(j) = -theta1(j) / (2 * integral);
  }
  auto residual = [&](const Eigen::VectorXd& a) -> Eigen::VectorXd {
    const auto traj = geodesic_ivp(GeodesicSpec::make(base, basis, a), integrator);
    return traj.theta.row(last).transpose() - theta1;
  };
  NewtonConfig newton;
  newton.residual_tolerance = 1e-13;
  newton.max_iterations = 20;
  newton.jacobian_fd_step = 1e-7;
  Eigen::VectorXd a = guess;
  try {
    a = newton_solve<double>(residual, guess, newton).root;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoConvergence) throw;
  }

  const GeodesicSpec spec = GeodesicSpec::make(base, basis, a);
  const GeodesicTrajectory traj = trajectory_from_table(spec, trajectory);
  double level = 0;
  for (int j = 0; j < n; ++j) level += a(j) * axes(j) * axes(j);
  level /= n;

  CylinderMesh mesh = cylinder_mesh(traj, level, std::move(sphere), stride);
  if (mesh.time_samples != samples) {
    throw Error(ErrorKind::VerificationFailed, "mesh time grid is not a strided trajectory grid");
  }
  const double scale = std::max(1.0, max_abs(table.points.cwiseAbs().eval()));
  const double mismatch = max_abs((mesh.points - table.points).cwiseAbs().eval()) / scale;
  if (!(mismatch < node_tolerance)) {
    throw Error(ErrorKind::VerificationFailed,
                "stored nodes disagree with the rebuilt cylinder by " + format_double(mismatch),
                mismatch, node_tolerance);
  }
  return mesh;
}

Json solution_json(const BvpSolution& solution, const std::string& trajectory_csv_name) {
  const GeodesicSpec& spec = solution.trajectory.spec;
  Json out;
  out["beta"] = vector_json(solution.spectrum.beta);
  out["a"] = vector_json(spec.coefficients);
  out["residual"] = solution.residual_norm;
  out["jacobian_condition"] = solution.jacobian_condition;
  out["trajectory_csv"] = trajectory_csv_name;
  out["base_frame"] = frame_to_json(spec.base.columns());
  out["adapted_basis"] = real_matrix_json(spec.adapted_basis);
  out["phase0"] = spec.phase0;
  out["phases"] = {solution.spectrum.phase0, solution.spectrum.phase1};
  out["maslov"] = solution.maslov;
  out["steps"] = solution.trajectory.sample_count() - 1;
  out["continuation_steps"] = solution.continuation_steps;
  out["newton_history"] = solution.newton_history;
  if (solution.experimental) out["experimental"] = "experimental: no existence guarantee";
  return out;
}

GeodesicTrajectory load_solution(const fs::path& path) {
  const Json doc = read_json(path);
  try {
    const ComplexMatrix raw = frame_from_json(doc.at("base_frame"));
    const LagrangianFrame base = make_frame(FlatCalabiYau{static_cast<int>(raw.cols())}, raw);
    const GeodesicSpec spec = GeodesicSpec::make(
        base, real_matrix_from_json(doc.at("adapted_basis")), vector_from_json(doc.at("a")));
    const fs::path csv = path.parent_path() / doc.at("trajectory_csv").get<std::string>();
    return trajectory_from_table(spec, read_trajectory_csv(csv));
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
}

Json report_json(const MeshReport& report) {
  Json out;
  out["max_omega"] = report.slag.max_omega;
  out["max_re_omega"] = report.slag.max_re_omega;
  out["min_im_omega"] = report.slag.min_im_omega;
  out["min_euler_angle"] = report.min_euler_angle;
  out["harmonic_residual"] =
      report.harmonic_residual ? Json(*report.harmonic_residual) : Json(nullptr);
  return out;
}

}  // namespace lagweb::io
