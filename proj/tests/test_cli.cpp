#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <numbers>
#include <sstream>

#include "lagweb/cli.hpp"
#include "lagweb/io.hpp"
#include "lagweb/sampling.hpp"

using namespace lagweb;
using namespace lagweb::io;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lagweb_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_frame(const fs::path& dir, const std::string& name, const ComplexMatrix& m) {
  const fs::path path = dir / name;
  write_text(path, dump_json(frame_to_json(m)));
  return path.string();
}

ComplexMatrix diag(std::initializer_list<std::complex<double>> entries) {
  const Index n = static_cast<Index>(entries.size());
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  Index j = 0;
  for (auto z : entries) m(j, j) = z, ++j;
  return m;
}

// Frames {I, diag(e^{i pi/6}, e^{i pi/4})}.
std::pair<std::string, std::string> diagonal_pair(const fs::path& dir) {
  return {write_frame(dir, "l0.json", ComplexMatrix::Identity(2, 2)),
          write_frame(dir, "l1.json", diag({std::polar(1.0, std::numbers::pi / 6),
                                            std::polar(1.0, std::numbers::pi / 4)}))};
}

int shell(const std::string& command) {
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("pair-analyze on the diagonal pair") {
  const fs::path dir = scratch("pair");
  const auto [l0, l1] = diagonal_pair(dir);
  const Run r = run({"pair-analyze", "--lambda0", l0, "--lambda1", l1, "--out", dir.string()});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(std::abs(j["beta"][0].get<double>() - std::numbers::pi / 6) < 1e-12);
  CHECK(std::abs(j["beta"][1].get<double>() - std::numbers::pi / 4) < 1e-12);
  CHECK(j["maslov"] == 0);
  CHECK(j["transverse"] == true);
  CHECK(read_text(dir / "pair.json") == r.out);
}

TEST_CASE("non-positive input is a validation error") {
  const fs::path dir = scratch("notpositive");
  const auto l0 = write_frame(dir, "l0.json", ComplexMatrix::Identity(2, 2));
  const auto l1 = write_frame(dir, "l1.json", diag({{0, 1}, 1}));
  const Run r = run({"pair-analyze", "--lambda0", l0, "--lambda1", l1});
  CHECK(r.code == 2);
  CHECK(r.err.find("NotPositive") != std::string::npos);
  CHECK(r.err.find("threshold") != std::string::npos);
}

TEST_CASE("geodesic on a line pair") {
  const fs::path dir = scratch("line");
  const auto l0 = write_frame(dir, "l0.json", ComplexMatrix::Identity(1, 1));
  const auto l1 = write_frame(dir, "l1.json", diag({std::polar(1.0, 0.6)}));
  const Run r = run({"geodesic", "--lambda0", l0, "--lambda1", l1, "--out", dir.string()});
  REQUIRE(r.code == 0);
  const Json j = read_json(dir / "solution.json");
  CHECK(std::abs(j["a"][0].get<double>() + std::tan(0.6) / 2) < 1e-6);
  CHECK(fs::exists(dir / "trajectory.csv"));

  // A line has no cylinder cross-section.
  const Run web = run({"webbing", "--solution", (dir / "solution.json").string(), "--levels", "-1",
                       "--out", (dir / "web").string()});
  CHECK(web.code == 2);
}

TEST_CASE("pipeline is deterministic and verify reproduces the report") {
  const fs::path dir = scratch("pipeline");
  const auto [l0, l1] = diagonal_pair(dir);
  std::string first_solution, first_report;
  for (int round = 0; round < 2; ++round) {
    const fs::path out = dir / ("run" + std::to_string(round));
    REQUIRE(run({"geodesic", "--lambda0", l0, "--lambda1", l1, "--out", out.string()}).code == 0);
    const Run web = run({"webbing", "--solution", (out / "solution.json").string(), "--levels",
                         "-1,-0.25", "--scales", "0.5", "--sphere-res", "32", "--time-stride", "8",
                         "--out", out.string()});
    REQUIRE(web.code == 0);
    if (round == 0) {
      first_solution = read_text(out / "solution.json") + read_text(out / "trajectory.csv");
      first_report = read_text(out / "report.json") + read_text(out / "mesh_0.csv") +
                     read_text(out / "mesh_2.csv");
    } else {
      CHECK(read_text(out / "solution.json") + read_text(out / "trajectory.csv") ==
            first_solution);
      CHECK(read_text(out / "report.json") + read_text(out / "mesh_0.csv") +
                read_text(out / "mesh_2.csv") ==
            first_report);
    }
  }

  const fs::path out = dir / "run0";
  const Json report = read_json(out / "report.json");
  CHECK(report["passed"] == true);
  CHECK(report["seed"] == 0);
  REQUIRE(report["meshes"].size() == 3);
  CHECK(report["meshes"][0]["level"] == -1.0);
  for (const auto& m : report["meshes"]) {
    const Run v = run({"verify", "--mesh", (out / m["mesh_csv"].get<std::string>()).string(),
                       "--trajectory", (out / "trajectory.csv").string(), "--out",
                       (out / "verify").string()});
    REQUIRE(v.code == 0);
    const Json again = Json::parse(v.out);
    for (const char* key : {"max_omega", "max_re_omega", "min_im_omega", "min_euler_angle",
                            "harmonic_residual"}) {
      CHECK(std::abs(again[key].get<double>() - m["report"][key].get<double>()) < 1e-12);
    }
  }
}

TEST_CASE("seeded sampling is recorded") {
  const fs::path dir = scratch("seed");
  Rng rng(8);
  const auto pair = random_maslov_zero_pair(rng, 4);
  const auto l0 = write_frame(dir, "l0.json", pair.lambda0.columns());
  const auto l1 = write_frame(dir, "l1.json", pair.lambda1.columns());
  REQUIRE(run({"geodesic", "--lambda0", l0, "--lambda1", l1, "--steps", "200", "--out",
               dir.string()})
              .code == 0);
  ::setenv("LAGWEB_SEED", "17", 1);
  const Run web = run({"webbing", "--solution", (dir / "solution.json").string(), "--levels", "-1",
                       "--sphere-res", "64", "--time-stride", "20", "--out", dir.string()});
  ::unsetenv("LAGWEB_SEED");
  REQUIRE(web.code == 0);
  CHECK(read_json(dir / "report.json")["seed"] == 17);
  const Run v = run({"verify", "--mesh", (dir / "mesh_0.csv").string(), "--trajectory",
                     (dir / "trajectory.csv").string()});
  CHECK(v.code == 0);
}

TEST_CASE("empty webbing grid") {
  const fs::path dir = scratch("empty");
  const auto [l0, l1] = diagonal_pair(dir);
  REQUIRE(run({"geodesic", "--lambda0", l0, "--lambda1", l1, "--steps", "100", "--out",
               dir.string()})
              .code == 0);
  const Run web = run({"webbing", "--solution", (dir / "solution.json").string(), "--out",
                       (dir / "web").string()});
  CHECK(web.code == 0);
  const Json j = read_json(dir / "web" / "report.json");
  CHECK(j["meshes"].empty());
  CHECK(j["passed"] == true);
}

TEST_CASE("unwritable output directory") {
  const fs::path dir = scratch("unwritable");
  const auto [l0, l1] = diagonal_pair(dir);
  write_text(dir / "blocker", "");
  const Run r = run({"geodesic", "--lambda0", l0, "--lambda1", l1, "--out",
                     (dir / "blocker" / "sub").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("IoError") != std::string::npos);
}

TEST_CASE("failed thresholds exit with 4") {
  const fs::path dir = scratch("threshold");
  const auto [l0, l1] = diagonal_pair(dir);
  REQUIRE(run({"geodesic", "--lambda0", l0, "--lambda1", l1, "--steps", "100", "--out",
               dir.string()})
              .code == 0);
  const Run web = run({"webbing", "--solution", (dir / "solution.json").string(), "--levels", "-1",
                       "--sphere-res", "16", "--euler-tol", "3", "--out", dir.string()});
  CHECK(web.code == 4);
  CHECK(web.err.find("min_euler_angle") != std::string::npos);
  CHECK(read_json(dir / "report.json")["passed"] == false);
}

TEST_CASE("maslov index one needs the experimental flag") {
  const fs::path dir = scratch("experimental");
  const auto l0 = write_frame(dir, "l0.json", ComplexMatrix::Identity(2, 2));
  const auto l1 = write_frame(dir, "l1.json", diag({std::polar(1.0, 0.3), std::polar(1.0, -0.2)}));
  const Run plain = run({"geodesic", "--lambda0", l0, "--lambda1", l1, "--out", dir.string()});
  CHECK(plain.code == 2);
  CHECK(plain.err.find("MaslovNonzero") != std::string::npos);
  const Run exp = run({"geodesic", "--lambda0", l0, "--lambda1", l1, "--experimental-maslov",
                       "--out", dir.string()});
  REQUIRE(exp.code == 0);
  CHECK(read_json(dir / "solution.json")["experimental"] == "experimental: no existence guarantee");
}

TEST_CASE("binary exit codes") {
  const char* bin = std::getenv("LAGWEB_BIN");
  if (bin == nullptr) return;
  const std::string exe = std::string("'") + bin + "'";
  const fs::path dir = scratch("binary");
  const auto [l0, l1] = diagonal_pair(dir);
  const auto bad = write_frame(dir, "bad.json", diag({{0, 1}, 1}));
  const std::string quiet = " >/dev/null 2>&1";
  CHECK(shell(exe + " --help" + quiet) == 0);
  CHECK(shell(exe + " frobnicate" + quiet) == 1);
  CHECK(shell(exe + " pair-analyze --lambda0 " + l0 + " --lambda1 " + l1 + quiet) == 0);
  CHECK(shell(exe + " pair-analyze --lambda0 " + l0 + " --lambda1 " + bad + quiet) == 2);
  CHECK(shell(exe + " verify --mesh missing.csv --trajectory missing.csv" + quiet) == 2);
}
