// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--expect-fail k]...
// Exit status is 0 iff the set of failing criteria equals the expected set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lagweb/bvpsolve.hpp"
#include "lagweb/sampling.hpp"
#include "lagweb/webbing.hpp"

using namespace lagweb;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "violated: " + what;
    }
  }
  void note(const std::string& text) {
    if (!detail.empty()) detail += "; ";
    detail += text;
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

LagrangianFrame identity_frame(int n) {
  return make_frame(FlatCalabiYau{n}, ComplexMatrix::Identity(n, n));
}

LagrangianFrame unit_phases(std::initializer_list<double> angles) {
  const Index n = static_cast<Index>(angles.size());
  ComplexMatrix d = ComplexMatrix::Zero(n, n);
  Index j = 0;
  for (double a : angles) d(j, j) = std::polar(1.0, a), ++j;
  return make_frame(FlatCalabiYau{static_cast<int>(n)}, d);
}

struct Solved {
  MaslovZeroPair pair;
  BvpSolution solution;
};

// The shared corpus of seeded random transverse Maslov-0 pairs.
std::vector<Solved> corpus;
std::vector<std::string> corpus_errors;

void build_corpus() {
  Rng rng(20240601);
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + i % 5;
    MaslovZeroPair pair = random_maslov_zero_pair(rng, n);
    try {
      BvpSolution sol = solve_bvp_maslov0(pair.lambda0, pair.lambda1);
      corpus.push_back({std::move(pair), std::move(sol)});
    } catch (const Error& e) {
      corpus_errors.push_back("pair " + std::to_string(i) + ": " + e.what());
    }
  }
}

Outcome criterion1() {
  Outcome out;
  double worst_a = 0, worst_traj = 0;
  for (double beta : {0.1, 0.6, 1.2}) {
    const BvpSolution sol = solve_bvp_maslov0(identity_frame(1), unit_phases({beta}));
    worst_a = std::max(worst_a, std::abs(sol.coefficients(0) + std::tan(beta) / 2));
    const auto& traj = sol.trajectory;
    const double tb = std::tan(beta);
    for (Index k = 0; k < traj.sample_count(); ++k) {
      const double t = traj.times[static_cast<std::size_t>(k)];
      worst_traj = std::max(worst_traj, std::abs(traj.theta(k, 0) - std::atan(t * tb)));
      worst_traj = std::max(worst_traj, std::abs(traj.g(k, 0) - (1 + t * t * tb * tb)));
    }
    out.require(traj.sample_count() == 2001, "2000 RK4 steps");
  }
  out.require(worst_a < 1e-8, "|a + tan(beta)/2| < 1e-8");
  out.require(worst_traj < 1e-9, "closed-form trajectory within 1e-9");
  out.note("max |a err| " + sci(worst_a) + ", max trajectory err " + sci(worst_traj));
  return out;
}

Outcome criterion2() {
  Outcome out;
  out.require(corpus_errors.empty(), "all 100 pairs converge");
  for (const auto& e : corpus_errors) out.note(e);
  double worst_res = 0, worst_end = 0, worst_rate = 0, top_a = -1e300;
  int short_histories = 0;
  for (const auto& [pair, sol] : corpus) {
    worst_res = std::max(worst_res, sol.residual_norm);
    top_a = std::max(top_a, sol.coefficients.maxCoeff());
    const auto& traj = sol.trajectory;
    worst_end = std::max(worst_end, principal_angle_distance(
                                        horizontal_frame(traj, traj.sample_count() - 1),
                                        pair.lambda1));
    worst_rate = std::max(worst_rate, quadratic_rate(sol.newton_history, 3));
    if (sol.newton_history.size() < 3) ++short_histories;
  }
  out.require(worst_res < 1e-10, "residual < 1e-10");
  out.require(top_a < 0, "all a_j < 0");
  out.require(worst_end < 1e-7, "endpoint principal angle < 1e-7");
  out.require(worst_rate < 10, "r_{k+1} / r_k^2 < 10 over the final 3 Newton steps");
  out.note(std::to_string(corpus.size()) + " solved, max residual " + sci(worst_res) +
           ", max a_j " + sci(top_a) + ", max endpoint angle " + sci(worst_end) +
           ", max quadratic ratio " + sci(worst_rate) + ", histories shorter than 3: " +
           std::to_string(short_histories));
  return out;
}

Outcome criterion3() {
  Outcome out;
  int mismatches = 0;
  double worst_defect = 0;
  for (const auto& [pair, sol] : corpus) {
    const MaslovIndex forward = maslov_index(pair.lambda0, pair.lambda1);
    const MaslovIndex backward = maslov_index(pair.lambda1, pair.lambda0);
    if (forward.m + backward.m != pair.lambda0.dim()) ++mismatches;
    worst_defect = std::max({worst_defect, forward.integrality_defect, backward.integrality_defect});
  }
  out.require(mismatches == 0, "m(L0,L1) + m(L1,L0) = n");
  out.require(worst_defect < 1e-8, "integrality defect < 1e-8");
  out.note(std::to_string(mismatches) + " mismatches, max integrality defect " + sci(worst_defect));
  return out;
}

Outcome criterion4() {
  Outcome out;
  double worst = 0;
  int non_monotone = 0;
  for (const auto& [pair, sol] : corpus) {
    const auto& traj = sol.trajectory;
    const Eigen::VectorXd& a = traj.spec.coefficients;
    for (Index k = 0; k < traj.sample_count(); ++k) {
      const double rate = hamiltonian_laplacian(horizontal_lift(traj, k), a);
      const double law = -2 * (a.array() / traj.g.row(k).transpose().array()).sum();
      worst = std::max(worst, std::abs(rate - law));
      if (k > 0 && !(traj.phase(k) > traj.phase(k - 1))) ++non_monotone;
    }
  }
  out.require(non_monotone == 0, "phase strictly increasing");
  out.require(worst < 1e-10, "|dphi/dt + 2 sum a_j/g_j| < 1e-10");
  out.note("max law defect " + sci(worst) + ", non-increasing steps " +
           std::to_string(non_monotone));
  return out;
}

Outcome criterion5() {
  Outcome out;
  double metric_slack = 1e300, coeff_slack = 1e300;
  for (const auto& [pair, sol] : corpus) {
    const double phi0 = sol.spectrum.phase0;
    const double phi1 = sol.spectrum.phase1;
    if (phi1 > 0) {
      const double bound = std::exp(pi * std::tan(phi1));
      metric_slack = std::min(metric_slack, bound + 1e-6 - sol.trajectory.g.maxCoeff());
    }
    const double n_bound = apriori_bounds(phi0, phi1).N;
    const double floor = -n_bound * (phi1 - phi0) / 2 - 1e-6;
    coeff_slack = std::min(coeff_slack, sol.coefficients.minCoeff() - floor);
  }
  const AprioriBounds quarter = apriori_bounds(0, pi / 4);
  out.require(metric_slack >= 0, "max g_j <= e^{pi tan phi1} + 1e-6");
  out.require(coeff_slack > 0, "a_j > -N (phi1 - phi0) / 2 - 1e-6");
  out.require(std::abs(quarter.N - 23.1407) < 1e-4, "N(pi/4) = e^pi");
  out.note("min metric slack " + sci(metric_slack) + ", min coefficient slack " +
           sci(coeff_slack) + ", N(pi/4) " + sci(quarter.N));
  return out;
}

Outcome criterion6() {
  Outcome out;
  Rng rng(606);
  std::uniform_real_distribution<double> coeff(-2.0, 0.0);
  std::uniform_real_distribution<double> phase(-1.0, 0.5);
  double worst_gap = 0;
  int accepted = 0, rejected = 0;
  std::vector<GeodesicSpec> order_specs;
  while (accepted < 100) {
    const int n = 1 + accepted % 6;
    // Total |a| of order 1 keeps most draws inside the phase window.
    const ComplexMatrix u = random_unitary(rng, n);
    const std::complex<double> det = u.determinant();
    const LagrangianFrame base = make_frame(
        FlatCalabiYau{n}, u * std::polar(1.0, (phase(rng) - std::arg(det)) / n));
    Eigen::VectorXd a(n);
    for (int j = 0; j < n; ++j) a(j) = std::min(coeff(rng) / n, -1e-3);
    const GeodesicSpec spec = GeodesicSpec::make(base, random_rotation(rng, n), a);
    std::optional<GeodesicTrajectory> run;
    try {
      run.emplace(geodesic_ivp(spec));
    } catch (const Error&) {
      ++rejected;
      continue;
    }
    const GeodesicTrajectory& traj = *run;
    if (!(traj.phase.cwiseAbs().maxCoeff() < 1.3)) {
      ++rejected;
      continue;
    }
    ++accepted;
    const auto frames = frame_ode_oracle(spec);
    for (Index k = 0; k < traj.sample_count(); k += 10) {
      const ComplexMatrix& f = frames[static_cast<std::size_t>(k)];
      const Eigen::MatrixXd gram = induced_metric(f);
      worst_gap = std::max(worst_gap, max_abs((gram.diagonal() - traj.g.row(k).transpose()).eval()));
      worst_gap = std::max(worst_gap, max_off_diagonal(gram));
      worst_gap = std::max(worst_gap, principal_angle_distance(f, horizontal_lift(traj, k)));
    }
    if (n >= 2 && order_specs.size() < 8) order_specs.push_back(spec);
  }
  out.require(worst_gap < 1e-6, "two routes agree within 1e-6");

  double lo = 1e300, hi = 0;
  for (const auto& spec : order_specs) {
    const auto fine = geodesic_ivp(spec, IntegratorConfig{4000});
    auto gap = [&](int steps) {
      const auto frames = frame_ode_oracle(spec, IntegratorConfig{steps});
      return max_abs((induced_metric(frames.back()).diagonal() -
                      fine.g.row(fine.sample_count() - 1).transpose())
                         .eval());
    };
    const double ratio = gap(20) / gap(40);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  out.require(lo > 12 && hi < 20, "step-halving ratio in (12, 20) (fourth order)");
  out.note("100 specs (" + std::to_string(rejected) + " rejected for phase near pi/2), max gap " +
           sci(worst_gap) + ", halving ratios in [" + sci(lo) + ", " + sci(hi) + "] over " +
           std::to_string(order_specs.size()) + " specs");
  return out;
}

Outcome criterion7() {
  Outcome out;
  std::vector<std::pair<std::string, GeodesicTrajectory>> meshes;
  meshes.emplace_back("diag(pi/6, pi/4)",
                      solve_bvp_maslov0(identity_frame(2), unit_phases({pi / 6, pi / 4})).trajectory);
  std::set<int> dims;
  for (const auto& [pair, sol] : corpus) {
    if (dims.insert(pair.lambda0.dim()).second) {
      meshes.emplace_back("random n = " + std::to_string(pair.lambda0.dim()), sol.trajectory);
    }
  }
  double omega = 0, re = 0, im = 1e300, euler = 1e300;
  for (const auto& [label, traj] : meshes) {
    // Full time grid for n = 2; every 40th sample above, where the default
    // sphere sampling is 2048 or 4096 points.
    const int stride = traj.dim() == 2 ? 1 : 40;
    const CylinderMesh mesh = cylinder_mesh(traj, -1, 0, stride);
    const SlagReport r = verify_slag(mesh);
    omega = std::max(omega, r.max_omega);
    re = std::max(re, r.max_re_omega);
    im = std::min(im, r.min_im_omega);
    euler = std::min(euler, euler_transversality(mesh));
  }
  GeodesicTrajectory bent = meshes.front().second;
  for (Index k = 1; k < bent.sample_count(); ++k) bent.theta(k, 0) += 0.01;
  const double control = verify_slag(cylinder_mesh(bent, -1)).max_re_omega;

  out.require(omega < 1e-8, "max |omega| < 1e-8");
  out.require(re < 1e-7, "max |Re Omega| < 1e-7");
  out.require(im > 0, "min Im Omega > 0");
  out.require(euler > 0.01, "min Euler angle > 0.01");
  out.require(control > 1e-3, "perturbed control |Re Omega| > 1e-3");
  out.note(std::to_string(meshes.size()) + " meshes, max |omega| " + sci(omega) +
           ", max |Re Omega| " + sci(re) + ", min Im Omega " + sci(im) + ", min Euler angle " +
           sci(euler) + ", control " + sci(control));
  return out;
}

Outcome criterion8() {
  Outcome out;
  const GeodesicTrajectory traj =
      solve_bvp_maslov0(identity_frame(2), unit_phases({pi / 6, pi / 4})).trajectory;
  const double unit = relflux(traj, -2, -1).relflux;
  const double a = relflux(traj, -4, -3).relflux;
  const double b = relflux(traj, -3, -2).relflux;
  const double whole = relflux(traj, -4, -1, FluxOptions{31}).relflux;
  const double split = std::abs(a + b + unit - whole);
  out.require(std::abs(unit - 1.0) < 1e-4, "relflux[-2, -1] = 1 within 1e-4");
  out.require(split < 2e-4, "additivity within 2e-4");
  out.require(std::abs(whole - 3.0) < 1e-4, "relflux[-4, -1] = 3 within 1e-4");
  out.note("relflux[-2,-1] " + std::to_string(unit) + ", additivity defect " + sci(split) +
           ", relflux[-4,-1] " + std::to_string(whole));
  return out;
}

Outcome criterion9() {
  Outcome out;
  const std::vector<std::pair<std::string, std::function<GeodesicTrajectory(int)>>> cases = {
      {"symmetric",
       [](int steps) {
         return geodesic_ivp(GeodesicSpec::make(identity_frame(2), Eigen::MatrixXd::Identity(2, 2),
                                                Eigen::VectorXd::Constant(2, -0.3)),
                             IntegratorConfig{steps});
       }},
      {"diag(pi/6, pi/4)", [](int steps) {
         BvpConfig cfg;
         cfg.integrator.step_count = steps;
         return solve_bvp_maslov0(identity_frame(2), unit_phases({pi / 6, pi / 4}), cfg)
             .trajectory;
       }}};
  for (const auto& [label, make] : cases) {
    std::vector<double> t, sq;
    for (int res : {64, 128, 256}) {
      const CylinderMesh mesh = cylinder_mesh(make(res), -1, res);
      t.push_back(harmonic_residual(mesh));
      sq.push_back(harmonic_residual(mesh, true));
    }
    const double r1 = t[0] / t[1], r2 = t[1] / t[2];
    out.require(r1 >= 3.5 && r1 <= 4.5 && r2 >= 3.5 && r2 <= 4.5,
                label + " refinement ratio in [3.5, 4.5]");
    out.require(*std::min_element(sq.begin(), sq.end()) > 0.1, label + " u = t^2 control > 0.1");
    out.note(label + ": residuals " + sci(t[0]) + ", " + sci(t[1]) + ", " + sci(t[2]) +
             " (ratios " + sci(r1) + ", " + sci(r2) + "), t^2 control " + sci(sq[0]) + ", " +
             sci(sq[1]) + ", " + sci(sq[2]));
  }
  return out;
}

Outcome criterion10() {
  Outcome out;
  const GeodesicTrajectory traj =
      solve_bvp_maslov0(identity_frame(2), unit_phases({pi / 6, pi / 4})).trajectory;
  const auto pair = webbing_family(traj, {-1, -4});
  const double node_gap = max_abs((pair[0].points - 2 * pair[1].points).eval());

  const auto family = webbing_family_scales(traj, {1.0, 0.5, 0.25, 0.125, 0.0625});
  const double unit = max_abs(family[0].points);
  double linear = 0;
  for (const auto& m : family) {
    const double s = std::sqrt(-m.chart.level);
    linear = std::max(linear, std::abs(max_abs(m.points) - s * unit));
  }
  out.require(node_gap < 1e-10, "c and 4c coincide after rescaling by 2 within 1e-10");
  out.require(linear < 1e-10, "node sup-norm linear in s");
  out.note("node gap " + sci(node_gap) + ", linearity defect " + sci(linear) +
           ", sup-norm at s = 0.0625: " + sci(max_abs(family.back().points)));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--expect-fail") == 0 && i + 1 < argc) {
      expected.insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--expect-fail k]...\n");
      return 2;
    }
  }

  const std::vector<std::pair<std::string, Outcome (*)()>> criteria = {
      {"n = 1 closed form", criterion1},
      {"Maslov-0 solver on 100 random pairs", criterion2},
      {"Maslov identities", criterion3},
      {"phase law", criterion4},
      {"a priori bounds", criterion5},
      {"two-route agreement", criterion6},
      {"imaginary special Lagrangian meshes", criterion7},
      {"flux identity", criterion8},
      {"harmonic adaptedness", criterion9},
      {"webbing homogeneity", criterion10}};

  const auto start = std::chrono::steady_clock::now();
  build_corpus();
  std::set<int> failed;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    Outcome out;
    try {
      out = criteria[k].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    if (!out.pass) failed.insert(id);
    std::printf("%s %2d %s: %s\n", out.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(),
                out.detail.c_str());
    std::fflush(stdout);
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%zu/%zu criteria passed in %.1f s\n", criteria.size() - failed.size(),
              criteria.size(), seconds);
  if (!expected.empty()) {
    std::printf("expected failures:");
    for (int k : expected) std::printf(" %d", k);
    std::printf("\n");
  }
  return failed == expected ? 0 : 1;
}
