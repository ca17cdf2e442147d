// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails. `--only K` runs criterion K alone.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "linf/budget.hpp"
#include "linf/error.hpp"
#include "linf/hermalg.hpp"
#include "linf/scenario.hpp"
#include "linf/solve.hpp"
#include "linf/subsol.hpp"
#include "linf/symfun.hpp"
#include "linf/torus.hpp"

using namespace linf;
using nlohmann::json;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

HermitianMetricField flat(const TorusGrid& g, double c = 1.0) {
  return HermitianMetricField::constant(g, c * HermMatrix::Identity(g.n(), g.n()));
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  json j;
  in >> j;
  return j;
}

fs::path work_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "linf_acceptance" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

Scenario config(const std::string& file) { return load_scenario(fs::path(LINF_CONFIG_DIR) / file); }

// Shared verify runs: the baseline N = 32 instance and two smaller J instances.
struct VerifyRun {
  std::string name;
  fs::path dir;
  RunResult result;
  double seconds = 0.0;
};

std::vector<VerifyRun>& kahler_runs() {
  static std::vector<VerifyRun> runs = [] {
    std::vector<VerifyRun> out;
    Scenario base = config("kahler_j.json");
    std::vector<Scenario> list{base};
    for (std::uint64_t seed : {3ULL, 5ULL}) {
      Scenario s = base;
      s.name = "kahler_j_N16_F" + std::to_string(seed);
      s.N = 16;
      s.F.seed = seed;
      list.push_back(s);
    }
    for (const Scenario& s : list) {
      VerifyRun r;
      r.name = s.name;
      r.dir = work_dir(s.name);
      const auto t0 = Clock::now();
      r.result = run_verify(s, r.dir);
      r.seconds = since(t0);
      out.push_back(std::move(r));
    }
    return out;
  }();
  return runs;
}

// 1 ------------------------------------------------------------------------
Outcome operator_algebra() {
  const auto t0 = Clock::now();
  bool ok = true;
  double worst_h = 0, worst_c = 0, worst_e = 0, worst_i = 0, gmin = 1e300;
  for (const ConeOperator& op :
       {ConeOperator::j_operator(2), ConeOperator::j_operator(3), ConeOperator::j_operator(4),
        ConeOperator::hessian_quotient(3, 1), ConeOperator::hessian_quotient(4, 2)}) {
    const StructureReport r = check_structure(op, 10000, 101);
    ok = ok && r.homogeneity_ok(1e-9) && r.gradient_ok() && r.concavity_ok(1e-9) &&
         r.euler_ok(1e-10) && r.involution_max <= 1e-10;
    worst_h = std::max(worst_h, r.homogeneity_max);
    worst_c = std::max(worst_c, r.concavity_max);
    worst_e = std::max(worst_e, r.euler_max);
    worst_i = std::max(worst_i, r.involution_max);
    gmin = std::min(gmin, r.grad_min);
  }
  const double t = since(t0);
  ok = ok && t < 10.0;
  return {ok, "5 operators x 10000 trials; homogeneity " + fmt("%.2e", worst_h) + ", concavity " +
                  fmt("%.2e", worst_c) + ", euler " + fmt("%.2e", worst_e) + ", involution " +
                  fmt("%.2e", worst_i) + ", min grad " + fmt("%.2e", gmin) + ", " + fmt("%.2f s", t)};
}

// 2 ------------------------------------------------------------------------
Outcome monotonicity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  int fails = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 5;
    const HermMatrix a = random_hermitian(n, rng);
    const HermMatrix b = a + random_psd(n, rng, (trial % 3 == 0) ? 1e-6 : 1.0);
    if (!min_max_monotone_check(a, b, 1e-10)) ++fails;
  }
  const double t = since(t0);
  return {fails == 0 && t < 5.0, std::to_string(fails) + " failures in 1000 trials, " + fmt("%.2f s", t)};
}

// 3 ------------------------------------------------------------------------
double ddbar_error(int n, int N) {
  const TorusGrid g(n, N);
  // cos(2 pi (a.x + b.y)) with a, b per complex direction.
  std::vector<double> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    a[i] = 1.0 + i;
    b[i] = (i % 2) ? -1.0 : 1.0;
  }
  const ScalarField phi = make_field(g, [&](const std::vector<double>& p) {
    double th = 0.0;
    for (int i = 0; i < n; ++i) th += a[i] * p[2 * i] + b[i] * p[2 * i + 1];
    return std::cos(2 * pi * th);
  });
  const HermitianMetricField H = ddbar(g, phi);
  double err = 0.0;
  for (std::int64_t k = 0; k < g.nodes(); ++k) {
    const HermMatrix h = H.at(k);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const std::complex<double> exact = -0.25 * 4 * pi * pi * std::complex<double>(a[i], -b[i]) *
                                           std::complex<double>(a[j], b[j]) * phi[k];
        err = std::max(err, std::abs(h(i, j) - exact));
      }
    }
  }
  return err;
}

Outcome ddbar_convergence() {
  const double r1 = ddbar_error(1, 32) / ddbar_error(1, 64);
  const double r2 = ddbar_error(2, 16) / ddbar_error(2, 32);
  const bool ok = r1 >= 3.6 && r1 <= 4.4 && r2 >= 3.6 && r2 <= 4.4;
  return {ok, "error ratio N->2N: n=1 " + fmt("%.4f", r1) + ", n=2 " + fmt("%.4f", r2)};
}

// 4 ------------------------------------------------------------------------
Outcome monge_ampere() {
  const auto t0 = Clock::now();
  auto run = [](int n, int N, const std::function<double(const std::vector<double>&)>& fn,
                double& err, double& res) {
    const TorusGrid g(n, N);
    const HermitianMetricField om = flat(g);
    const ScalarField psi = make_field(g, fn);
    const HermitianMetricField H = om + ddbar(g, psi);
    ScalarField rhs(g.nodes());
    for (std::int64_t i = 0; i < g.nodes(); ++i) rhs[i] = H.at(i).determinant().real();
    const SolveReport r = solve_ma_torus(g, om, rhs, 1e-12);
    err = ((r.solution.array() - r.solution.maxCoeff()) - (psi.array() - psi.maxCoeff())).abs().maxCoeff();
    const HermitianMetricField H2 = om + ddbar(g, r.solution);
    res = 0.0;
    for (std::int64_t i = 0; i < g.nodes(); ++i) {
      res = std::max(res, std::abs(H2.at(i).determinant().real() / (rhs[i] * std::exp(r.compat_shift)) - 1.0));
    }
  };
  double e1, r1, e2, r2;
  run(1, 64, [](const std::vector<double>& x) { return 0.05 * std::cos(2 * pi * x[0]); }, e1, r1);
  run(2, 32, [](const std::vector<double>& x) { return 0.03 * (std::cos(2 * pi * x[0]) + std::cos(2 * pi * x[3])); },
      e2, r2);
  const double t = since(t0);
  const bool ok = e1 <= 1e-8 && e2 <= 1e-6 && r1 <= 1e-10 && r2 <= 1e-10 && t < 60.0;
  return {ok, "sup error n=1 " + fmt("%.2e", e1) + ", n=2 " + fmt("%.2e", e2) + "; forward residual " +
                  fmt("%.2e", std::max(r1, r2)) + ", " + fmt("%.2f s", t)};
}

// 5 ------------------------------------------------------------------------
Outcome subsolution_checkers() {
  double worst_gap = 0.0;
  for (int n : {2, 3}) {
    for (double F : {0.0, 0.3, -0.2}) {
      const double delta = 0.5;
      const TorusGrid g(n, 8);
      const ScalarField Fs = ScalarField::Constant(g.nodes(), F);
      auto pass = [&](double c) {
        return check_delta_tilde(ConeOperator::j_operator(n), g, flat(g), flat(g, c), Fs, delta).pass;
      };
      double lo = 0.1, hi = 50.0;
      for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        (pass(mid) ? hi : lo) = mid;
      }
      const double expected = (n - 1) / ((1.0 - delta) * std::exp(-F));
      worst_gap = std::max(worst_gap, std::abs(hi - expected));
    }
  }
  const TorusGrid g(2, 8);
  const SubsolutionCertificate ma = check_delta_R(ConeOperator::monge_ampere(2), g, flat(g), flat(g, 2.0),
                                                  ScalarField::Zero(g.nodes()), 1.0, 1.415, 512, 1);
  const double rad_err = std::abs(ma.worst_value - std::sqrt(2.0));
  const bool ok = worst_gap <= 1e-9 && ma.pass && rad_err <= 1e-6;
  return {ok, "J threshold crossing error " + fmt("%.2e", worst_gap) + "; MA slice radius " +
                  fmt("%.9f", ma.worst_value) + " (pass at R=1.415: " + (ma.pass ? "yes" : "no") + ")"};
}

// 6 ------------------------------------------------------------------------
Outcome kahler_pipeline() {
  const VerifyRun& r = kahler_runs().front();
  const json chain = read_json(r.dir / "chain.json");
  const json cert = read_json(r.dir / "certificate.json");
  const json bud = read_json(r.dir / "budget.json");
  const double sup = chain["sup_neg_phi"];
  const bool ok = cert["pass"] && chain["psi_pass"] && chain["recursion"]["pass"] &&
                  chain["sup_within_literal"] && chain["sup_within_corrected"] && chain["pass"] &&
                  r.seconds < 600.0;
  double psi_max = -1e300;
  for (const auto& e : chain["entries"]) psi_max = std::max(psi_max, e["psi_max"].get<double>());
  return {ok, "J n=2 N=32, R=" + fmt("%g", bud["R"].get<double>()) + "; max Psi " + fmt("%.3g", psi_max) +
                  " <= slack " + fmt("%.3g", chain["slack"].get<double>()) + "; recursion worst " +
                  fmt("%.3g", chain["recursion"]["worst_ratio"].get<double>()) + "; sup(-phi') " +
                  fmt("%.4g", sup) + " <= S " + fmt("%.4g", bud["S_infty"].get<double>()) +
                  " (corrected " + fmt("%.3g", bud["S_infty_corrected"].get<double>()) + "); " +
                  fmt("%.1f s", r.seconds)};
}

// 7 ------------------------------------------------------------------------
Outcome degeneration() {
  const Scenario s = config("sweep_diag.json");
  const fs::path d = work_dir("sweep");
  const RunResult r = run_sweep(s, d);
  bool ok = r.summary["S_infty_constant"].get<bool>();
  double tmin = 1e300, margin = 1e300;
  for (const auto& row : r.summary["rows"]) {
    ok = ok && row["ok"] && row["kset_membership"] && row["sup_neg_phi"].get<double>() <= row["S_infty"].get<double>();
    tmin = std::min(tmin, row["t"].get<double>());
    margin = std::min(margin, row["margin"].get<double>());
  }
  ok = ok && tmin <= 0.1 && r.exit_code == 0;
  return {ok, std::to_string(r.summary["rows"].size()) + " members down to t=" + fmt("%g", tmin) +
                  "; S constant = " + (r.summary["S_infty_constant"].get<bool>() ? "yes" : "no") +
                  " (" + fmt("%.6g", r.summary["budget"]["S_infty"].get<double>()) + "); min margin " +
                  fmt("%.4g", margin)};
}

// 8 ------------------------------------------------------------------------
Outcome de_giorgi_consistency() {
  bool ok = true;
  int used = 0;
  std::string probe;
  for (const VerifyRun& r : kahler_runs()) {
    const json dg = read_json(r.dir / "degiorgi.json");
    const json chain = read_json(r.dir / "chain.json");
    if (!dg.contains("probe")) ok = false;
    if (!chain["recursion"]["pass"].get<bool>()) continue;
    ++used;
    ok = ok && !dg.contains("error") && dg["level_le_S_literal"] && dg["level_le_S_corrected"];
    if (probe.empty()) {
      probe = "literal s0 " + fmt("%.4g", dg["probe"]["s0_literal"].get<double>()) + " vs corrected " +
              fmt("%.3g", dg["probe"]["s0_corrected"].get<double>()) + ", literal threshold vacuous: " +
              (dg["probe"]["threshold_literal_vacuous"].get<bool>() ? "yes" : "no");
    }
  }
  ok = ok && used > 0;
  return {ok, std::to_string(used) + " instances with passing recursion; level <= both closed forms; " + probe};
}

// 9 ------------------------------------------------------------------------
Outcome integral_lemmas() {
  const TorusGrid g(2, 16);
  const HermitianMetricField om = flat(g), chi = flat(g, 3.0);
  const double C0 = green(g, om, 0).C0;
  std::vector<ScalarField> samples, vs;
  for (int i = 0; i < 100; ++i) samples.push_back(sample_psh(g, om, 9000 + static_cast<std::uint64_t>(i)));
  for (int i = 0; i < 20; ++i) vs.push_back(0.95 * 3.0 / 2.0 * samples[static_cast<std::size_t>(i)]);
  const LemmaReport r = lemma_checks(g, om, samples, chi, vs, 4.0, C0);
  const bool ok = r.pass && r.violations == 0 && r.samples == 100 && r.L1_max <= r.L1_bound &&
                  r.v_max <= r.v_bound;
  return {ok, "100 samples: L1 " + fmt("%.3g", r.L1_max) + " <= 2nC0 " + fmt("%.3g", r.L1_bound) + ", C1 " +
                  fmt("%.3g", r.Lq_max) + ", v " + fmt("%.3g", r.v_max) + " <= 2k2C0 " +
                  fmt("%.3g", r.v_bound) + ", violations " + std::to_string(r.violations)};
}

// 10 -----------------------------------------------------------------------
Outcome hermitian() {
  const Scenario s = config("hermitian_n1.json");
  const fs::path d = work_dir("hermitian");
  const auto t0 = Clock::now();
  const RunResult r = run_verify(s, d);
  const double t = since(t0);
  const json h = read_json(d / "hermitian.json");
  const double bound = r.summary["final_bound"], obs = r.summary["observed"];
  const bool ok = r.exit_code == 0 && bound >= obs && t < 60.0 && h["phi_pass"] && h["recursion_pass"];
  return {ok, "n=1 N=" + std::to_string(s.N) + ": bound " + fmt("%.4g", bound) + " >= observed " +
                  fmt("%.4g", obs) + "; Phi, recursion, c0 consistency pass; " + fmt("%.2f s", t)};
}

// 11 -----------------------------------------------------------------------
Outcome eigen_chain() {
  bool ok = true;
  double lo = 1e300, hi = 1e300;
  std::int64_t flagged = 0;
  int used = 0;
  for (const VerifyRun& r : kahler_runs()) {
    const fs::path p = r.dir / "eigen_chain.json";
    if (!fs::exists(p)) {
      ok = false;
      continue;
    }
    const json j = read_json(p);
    ++used;
    ok = ok && j["pass"];
    lo = std::min(lo, j["lower_slack"].get<double>());
    hi = std::min(hi, j["upper_slack"].get<double>());
    flagged += j["flagged_nodes"].get<std::int64_t>();
  }
  ok = ok && used > 0;
  return {ok, std::to_string(used) + " solved J instances (delta=0.4), " + std::to_string(flagged) +
                  " flagged nodes; min lower slack " + fmt("%.3g", lo) + ", min upper slack " + fmt("%.3g", hi)};
}

}  // namespace

int main(int argc, char** argv) {
  std::optional<int> only;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0) only = std::atoi(argv[i + 1]);
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"operator algebra", operator_algebra},
      {"eigenvalue monotonicity", monotonicity},
      {"ddbar convergence", ddbar_convergence},
      {"Monge-Ampere solver", monge_ampere},
      {"subsolution checkers", subsolution_checkers},
      {"Kahler pipeline", kahler_pipeline},
      {"degeneration uniformity", degeneration},
      {"De Giorgi consistency", de_giorgi_consistency},
      {"integral lemmas", integral_lemmas},
      {"Hermitian n=1 pipeline", hermitian},
      {"eigenvalue chain", eigen_chain},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (only && *only != id) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%02d] %s  %s: %s\n", id, o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
