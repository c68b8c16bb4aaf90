#include "lagweb/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <ostream>

#include "lagweb/io.hpp"

namespace lagweb::cli {
namespace {

namespace fs = std::filesystem;
using io::Json;

struct Thresholds {
  double omega = 1e-8;
  double re_omega = 1e-7;
  double euler = 0.01;
  double harmonic = 1e-3;
};

struct RunConfig {
  std::string lambda0, lambda1;
  std::string out_dir = ".";
  int steps = 2000;
  double tol = 1e-10;
  bool experimental = false;
  std::string solution;
  std::string levels;
  std::string scales;
  int sphere_res = 0;
  int time_stride = 1;
  std::string mesh, trajectory;
  Thresholds thresholds;
};

int seed_from_env() {
  const char* raw = std::getenv("LAGWEB_SEED");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (*end != '\0' || v < 0 || v > 1'000'000'000) {
    throw Error(ErrorKind::InvalidArgument, std::string("LAGWEB_SEED must be a non-negative integer, got ") + raw);
  }
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "not a number in list: '" + item + "'");
    }
  }
  return out;
}

fs::path prepare_dir(const std::string& dir) {
  const fs::path path(dir);
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec || !fs::is_directory(path)) {
    throw Error(ErrorKind::IoError, "output directory " + dir + " is not writable" +
                                        (ec ? " (" + ec.message() + ")" : std::string()));
  }
  const fs::path probe = path / ".lagweb_write_probe";
  io::write_text(probe, "");
  fs::remove(probe, ec);
  return path;
}

void check_thresholds(const Thresholds& t) {
  for (double v : {t.omega, t.re_omega, t.euler, t.harmonic}) {
    if (!(v > 0)) throw Error(ErrorKind::InvalidArgument, "tolerances must be positive", v, 0);
  }
}

// Names of the checks a report fails.
std::vector<std::string> failures(const MeshReport& r, const Thresholds& t) {
  std::vector<std::string> out;
  if (!(r.slag.max_omega < t.omega)) out.push_back("max_omega");
  if (!(r.slag.max_re_omega < t.re_omega)) out.push_back("max_re_omega");
  if (!(r.slag.min_im_omega > 0)) out.push_back("min_im_omega");
  if (!(r.min_euler_angle > t.euler)) out.push_back("min_euler_angle");
  if (r.harmonic_residual && !(*r.harmonic_residual < t.harmonic)) {
    out.push_back("harmonic_residual");
  }
  return out;
}

void print_failures(std::ostream& err, const std::string& label, const MeshReport& r,
                    const Thresholds& t) {
  for (const auto& name : failures(r, t)) {
    const auto q = name == "max_omega"         ? std::pair{r.slag.max_omega, t.omega}
                   : name == "max_re_omega"    ? std::pair{r.slag.max_re_omega, t.re_omega}
                   : name == "min_im_omega"    ? std::pair{r.slag.min_im_omega, 0.0}
                   : name == "min_euler_angle" ? std::pair{r.min_euler_angle, t.euler}
                                               : std::pair{*r.harmonic_residual, t.harmonic};
    err << "VerificationFailed: " << label << " " << name << " = " << io::format_double(q.first)
        << " (threshold " << io::format_double(q.second) << ")\n";
  }
}

int pair_analyze(const RunConfig& cfg, std::ostream& out) {
  const LagrangianFrame l0 = io::read_frame(cfg.lambda0);
  const LagrangianFrame l1 = io::read_frame(cfg.lambda1);
  if (l0.dim() != l1.dim()) throw Error(ErrorKind::InvalidArgument, "frames differ in dimension");
  const PairSpectrum s = pair_decomposition(l0, l1);
  const MaslovIndex m = maslov_index(s);
  Json doc;
  doc["beta"] = std::vector<double>(s.beta.data(), s.beta.data() + s.beta.size());
  doc["phases"] = {s.phase0, s.phase1};
  doc["maslov"] = m.m;
  doc["integrality_defect"] = m.integrality_defect;
  doc["transverse"] = s.transverse;
  doc["membership_residual"] = s.membership_residual;
  const std::string text = io::dump_json(doc);
  if (cfg.out_dir != ".") io::write_text(prepare_dir(cfg.out_dir) / "pair.json", text);
  out << text;
  return kOk;
}

int geodesic(const RunConfig& cfg, std::ostream& out) {
  if (cfg.steps < 1) throw Error(ErrorKind::InvalidArgument, "--steps must be positive");
  if (!(cfg.tol > 0)) throw Error(ErrorKind::InvalidArgument, "--tol must be positive", cfg.tol, 0);
  const LagrangianFrame l0 = io::read_frame(cfg.lambda0);
  const LagrangianFrame l1 = io::read_frame(cfg.lambda1);
  if (l0.dim() != l1.dim()) throw Error(ErrorKind::InvalidArgument, "frames differ in dimension");
  const fs::path dir = prepare_dir(cfg.out_dir);

  BvpConfig config;
  config.integrator.step_count = cfg.steps;
  config.newton.residual_tolerance = cfg.tol;
  config.intermediate_tolerance = std::max(cfg.tol, config.intermediate_tolerance);
  const BvpSolution solution = solve_geodesic(l0, l1, config, cfg.experimental);

  const std::string csv_name = "trajectory.csv";
  io::write_text(dir / csv_name, io::trajectory_csv(solution.trajectory));
  const std::string text = io::dump_json(io::solution_json(solution, csv_name));
  io::write_text(dir / "solution.json", text);
  out << text;
  return kOk;
}

int webbing(const RunConfig& cfg, int seed, std::ostream& out, std::ostream& err) {
  check_thresholds(cfg.thresholds);
  if (cfg.time_stride < 1) throw Error(ErrorKind::InvalidArgument, "--time-stride must be positive");
  if (cfg.sphere_res < 0) throw Error(ErrorKind::InvalidArgument, "--sphere-res must be >= 0");
  std::vector<double> levels = parse_list(cfg.levels);
  for (double s : parse_list(cfg.scales)) {
    if (!(s > 0)) throw Error(ErrorKind::SignError, "scales must be positive", s, 0);
    levels.push_back(-s * s);
  }
  std::stable_sort(levels.begin(), levels.end(),
                   [](double x, double y) { return std::abs(x) > std::abs(y); });
  const GeodesicTrajectory traj = io::load_solution(cfg.solution);
  const fs::path dir = prepare_dir(cfg.out_dir);

  Json meshes = Json::array();
  bool passed = true;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const CylinderMesh mesh =
        cylinder_mesh(traj, levels[k], sphere_sampling(traj.dim(), cfg.sphere_res, seed),
                      cfg.time_stride);
    const MeshReport report = mesh_report(mesh);
    const std::string name = "mesh_" + std::to_string(k) + ".csv";
    io::write_text(dir / name, io::mesh_csv(mesh));
    const bool ok = failures(report, cfg.thresholds).empty();
    if (!ok) print_failures(err, name, report, cfg.thresholds);
    passed = passed && ok;
    meshes.push_back({{"level", levels[k]},
                      {"mesh_csv", name},
                      {"orientation", mesh.orientation},
                      {"nodes", mesh.node_count()},
                      {"passed", ok},
                      {"report", io::report_json(report)}});
  }
  Json doc;
  doc["seed"] = seed;
  doc["solution"] = fs::path(cfg.solution).filename().string();
  doc["meshes"] = std::move(meshes);
  doc["passed"] = passed;
  const std::string text = io::dump_json(doc);
  io::write_text(dir / "report.json", text);
  out << text;
  return passed ? kOk : kVerification;
}

int verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  check_thresholds(cfg.thresholds);
  const io::MeshTable table = io::read_mesh_csv(cfg.mesh);
  const io::TrajectoryTable trajectory = io::read_trajectory_csv(cfg.trajectory);
  const CylinderMesh mesh = io::rebuild_mesh(table, trajectory);
  const MeshReport report = mesh_report(mesh);
  const std::string text = io::dump_json(io::report_json(report));
  if (cfg.out_dir != ".") io::write_text(prepare_dir(cfg.out_dir) / "verify_report.json", text);
  out << text;
  if (!failures(report, cfg.thresholds).empty()) {
    print_failures(err, fs::path(cfg.mesh).filename().string(), report, cfg.thresholds);
    return kVerification;
  }
  return kOk;
}

void add_thresholds(CLI::App* cmd, Thresholds& t) {
  cmd->add_option("--omega-tol", t.omega, "Bound on max |omega| over tangent pairs")
      ->capture_default_str();
  cmd->add_option("--re-omega-tol", t.re_omega, "Bound on max |Re Omega|")->capture_default_str();
  cmd->add_option("--euler-tol", t.euler, "Lower bound on the Euler angle (rad)")
      ->capture_default_str();
  cmd->add_option("--harmonic-tol", t.harmonic, "Bound on the n = 2 harmonic residual")
      ->capture_default_str();
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoConvergence:
    case ErrorKind::SingularJacobian:
      return kNoConvergence;
    case ErrorKind::VerificationFailed:
    case ErrorKind::InconsistentBoundary:
      return kVerification;
    default:
      return kValidation;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Geodesics of positive Lagrangian subspaces and their webbings", "lagweb"};
  app.require_subcommand(1);

  auto* pair = app.add_subcommand("pair-analyze", "Angles, phases and Maslov index of a pair");
  pair->add_option("--lambda0", cfg.lambda0, "Frame JSON of the first subspace")->required();
  pair->add_option("--lambda1", cfg.lambda1, "Frame JSON of the second subspace")->required();
  pair->add_option("--out", cfg.out_dir, "Also write pair.json here");

  auto* geo = app.add_subcommand("geodesic", "Solve the geodesic boundary-value problem");
  geo->add_option("--lambda0", cfg.lambda0, "Frame JSON of the start subspace")->required();
  geo->add_option("--lambda1", cfg.lambda1, "Frame JSON of the end subspace")->required();
  geo->add_option("--steps", cfg.steps, "RK4 steps on [0, 1]")->capture_default_str();
  geo->add_option("--tol", cfg.tol, "Newton residual tolerance")->capture_default_str();
  geo->add_flag("--experimental-maslov", cfg.experimental,
                "Allow Maslov indices other than 0 and n (no existence guarantee)");
  geo->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();

  auto* web = app.add_subcommand("webbing", "Cylinder meshes of a solved geodesic");
  web->add_option("--solution", cfg.solution, "solution.json from `geodesic`")->required();
  web->add_option("--levels", cfg.levels, "Comma-separated negative levels c")
      ->allow_extra_args(false);
  web->add_option("--scales", cfg.scales, "Comma-separated scales s (level -s^2)");
  web->add_option("--sphere-res", cfg.sphere_res, "Sphere resolution (0: default per n)")
      ->capture_default_str();
  web->add_option("--time-stride", cfg.time_stride, "Use every k-th trajectory sample")
      ->capture_default_str();
  web->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
  add_thresholds(web, cfg.thresholds);

  auto* ver = app.add_subcommand("verify", "Re-check a stored mesh against its trajectory");
  ver->add_option("--mesh", cfg.mesh, "Mesh CSV")->required();
  ver->add_option("--trajectory", cfg.trajectory, "Trajectory CSV")->required();
  ver->add_option("--out", cfg.out_dir, "Also write verify_report.json here");
  add_thresholds(ver, cfg.thresholds);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    const int seed = seed_from_env();
    if (pair->parsed()) return pair_analyze(cfg, out);
    if (geo->parsed()) return geodesic(cfg, out);
    if (web->parsed()) return webbing(cfg, seed, out, err);
    return verify(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what();
    if (!std::isnan(e.quantity())) err << " [quantity " << io::format_double(e.quantity());
    if (!std::isnan(e.threshold())) err << ", threshold " << io::format_double(e.threshold());
    if (!std::isnan(e.quantity())) err << "]";
    err << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
}

}  // namespace lagweb::cli
