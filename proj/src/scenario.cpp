#include "linf/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

#include "linf/budget.hpp"
#include "linf/error.hpp"
#include "linf/hermitian.hpp"
#include "linf/io.hpp"
#include "linf/solve.hpp"
#include "linf/subsol.hpp"

namespace linf {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- parsing

namespace {

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(where_ + ": " + msg);
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json* find(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(std::string(key) + " must be a number");
      out = v->get<double>();
    }
  }
  void get(const char* key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(std::string(key) + " must be an integer");
      out = v->get<int>();
    }
  }
  void get(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) {
        fail(std::string(key) + " must be a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }
  void get(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(std::string(key) + " must be true or false");
      out = v->get<bool>();
    }
  }
  void get(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(std::string(key) + " must be a string");
      out = v->get<std::string>();
    }
  }
  void get(const char* key, std::optional<double>& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) return;
      if (!v->is_number()) fail(std::string(key) + " must be a number");
      out = v->get<double>();
    }
  }
  void get(const char* key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(std::string(key) + " must be an array of numbers");
      out.clear();
      for (const json& e : *v) {
        if (!e.is_number()) fail(std::string(key) + " must be an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }
  void get(const char* key, std::vector<int>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(std::string(key) + " must be an array of integers");
      out.clear();
      for (const json& e : *v) {
        if (!e.is_number_integer()) fail(std::string(key) + " must be an array of integers");
        out.push_back(e.get<int>());
      }
    }
  }

  template <class Fn>
  void child(const char* key, Fn&& fn) {
    if (const json* v = find(key)) {
      Reader r(*v, where_ + "." + key);
      fn(r);
      r.finish();
    }
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) fail("unknown key '" + item.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

ConeOperator OperatorSpec::make(int n) const {
  if (type == "J") return ConeOperator::j_operator(n);
  if (type == "MongeAmpere") return ConeOperator::monge_ampere(n);
  if (type == "SigmaK") return ConeOperator::sigma_k(n, k);
  if (type == "HessianQuotient") return ConeOperator::hessian_quotient(n, k);
  throw ConfigError("unknown operator type '" + type + "'");
}

Scenario parse_scenario(const json& j) {
  Scenario s;
  Reader r(j, "scenario");
  check(r.has("schema"), "scenario: missing 'schema'");
  r.get("schema", s.schema);
  check(s.schema == kScenarioSchema,
        "scenario: unsupported schema '" + s.schema + "' (expected " + kScenarioSchema + ")");
  r.get("name", s.name);
  r.get("kind", s.kind);
  r.child("operator", [&](Reader& o) {
    o.get("type", s.op.type);
    o.get("k", s.op.k);
  });
  r.child("grid", [&](Reader& g) {
    g.get("n", s.n);
    g.get("N", s.N);
  });
  r.child("metric", [&](Reader& m) {
    m.get("type", s.metric.type);
    m.get("t", s.metric.t);
    m.get("exponent", s.metric.exponent);
    m.get("amplitude", s.metric.amplitude);
    m.get("seed", s.metric.seed);
    m.get("modes", s.metric.modes);
    m.get("max_frequency", s.metric.max_frequency);
  });
  r.child("chi", [&](Reader& c) { c.get("scale", s.chi_scale); });
  r.child("F", [&](Reader& f) {
    f.get("constant", s.F.constant);
    f.get("amplitude", s.F.amplitude);
    f.get("seed", s.F.seed);
    f.get("modes", s.F.modes);
    f.get("max_frequency", s.F.max_frequency);
  });
  r.get("delta", s.delta);
  if (const json* v = r.find("R")) {
    if (v->is_string()) {
      check(v->get<std::string>() == "derive", "scenario: R must be a number or \"derive\"");
    } else if (v->is_number()) {
      s.R = v->get<double>();
    } else {
      r.fail("R must be a number or \"derive\"");
    }
  }
  r.get("kappa1", s.kappa1);
  r.get("kappa2", s.kappa2);
  r.get("q", s.q);
  r.get("p", s.p);
  r.get("eigen_chain_delta", s.eigen_chain_delta);
  r.child("constants", [&](Reader& c) {
    c.get("C0", s.C0);
    c.get("C1", s.C1);
  });
  r.child("tolerance", [&](Reader& t) {
    t.get("newton", s.tol.newton);
    t.get("max_iter", s.tol.max_iter);
    t.get("krylov_max_iter", s.tol.krylov_max_iter);
    t.get("slack_factor", s.tol.slack_factor);
    t.get("eigen_chain", s.tol.eigen_chain);
  });
  r.child("certificate", [&](Reader& c) {
    c.get("kind", s.cert.kind);
    c.get("directions", s.cert.directions);
    c.get("T_max", s.cert.T_max);
  });
  r.child("aux", [&](Reader& a) {
    a.get("s_fractions", s.aux.s_fractions);
    a.get("k_list", s.aux.k_list);
    a.get("profile_points", s.aux.profile_points);
    a.get("profile_extend", s.aux.profile_extend);
    a.get("psh_samples", s.aux.psh_samples);
    a.get("v_samples", s.aux.v_samples);
  });
  r.child("sweep", [&](Reader& w) {
    w.get("t_list", s.sweep.t_list);
    w.get("A", s.sweep.A);
    w.get("K", s.sweep.K);
    w.get("gamma_floor", s.sweep.gamma_floor);
  });
  r.child("hermitian", [&](Reader& h) {
    h.get("r0", s.hermitian.r0);
    h.get("s_fractions", s.hermitian.s_fractions);
    h.get("k_list", s.hermitian.k_list);
    h.get("profile_points", s.hermitian.profile_points);
  });
  r.child("outputs", [&](Reader& o) {
    o.get("snapshot", s.snapshot);
    o.get("snapshot_csv", s.snapshot_csv);
  });
  r.get("seed", s.seed);
  r.finish();

  check(s.kind == "kahler" || s.kind == "hermitian" || s.kind == "sweep",
        "scenario: kind must be kahler, hermitian or sweep");
  check(s.n >= 1 && s.n <= 4, "grid.n must lie in 1..4");
  check(s.N >= 8 && s.N % 2 == 0, "grid.N must be even and at least 8");
  try {
    (void)s.op.make(s.n);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("operator: ") + e.what());
  }
  check(s.metric.type == "flat" || s.metric.type == "diagonal" || s.metric.type == "perturbed",
        "metric.type must be flat, diagonal or perturbed");
  check(s.metric.t > 0.0, "metric.t must be positive");
  check(s.metric.amplitude >= 0.0 && s.metric.amplitude < 1.0, "metric.amplitude must lie in [0, 1)");
  check(s.metric.modes >= 1 && s.metric.max_frequency >= 1 && 2 * s.metric.max_frequency < s.N,
        "metric modes/max_frequency out of range");
  check(s.F.modes >= 1 && s.F.max_frequency >= 1 && 2 * s.F.max_frequency < s.N,
        "F modes/max_frequency out of range");
  check(s.chi_scale > 0.0, "chi.scale must be positive");
  check(s.delta > 0.0, "delta must be positive");
  check(!s.R || *s.R > 0.0, "R must be positive");
  check(s.kappa1 >= 0.0, "kappa1 must be non-negative");
  check(!s.kappa2 || *s.kappa2 > 0.0, "kappa2 must be positive");
  check(s.q == 0.0 || s.q > s.n, "q must exceed n");
  check(s.p == 0.0 || s.p > s.n, "p must exceed n");
  check(!s.eigen_chain_delta || (*s.eigen_chain_delta > 0.0 && *s.eigen_chain_delta < 1.0),
        "eigen_chain_delta must lie in (0, 1)");
  check(!s.C0 || *s.C0 > 0.0, "constants.C0 must be positive");
  check(!s.C1 || *s.C1 > 0.0, "constants.C1 must be positive");
  check(s.tol.newton > 0.0 && s.tol.max_iter > 0 && s.tol.krylov_max_iter > 0,
        "tolerance values must be positive");
  check(s.tol.slack_factor >= 0.0 && s.tol.eigen_chain >= 0.0, "slack tolerances must be non-negative");
  check(s.cert.kind == "delta_R" || s.cert.kind == "delta_tilde" || s.cert.kind == "both",
        "certificate.kind must be delta_R, delta_tilde or both");
  check(s.cert.directions >= 0 && s.cert.T_max > 0.0, "certificate sampling out of range");
  for (double f : s.aux.s_fractions) check(f >= 0.0 && f < 1.0, "aux.s_fractions must lie in [0, 1)");
  for (int k : s.aux.k_list) check(k >= 1, "aux.k_list entries must be positive");
  check(s.aux.profile_points >= 2 && s.aux.profile_extend >= 1.0, "aux profile settings out of range");
  check(s.aux.psh_samples >= 1 && s.aux.v_samples >= 0, "aux sample counts out of range");
  for (double t : s.sweep.t_list) check(t > 0.0, "sweep.t_list entries must be positive");
  check(s.hermitian.r0 > 0.0 && s.hermitian.r0 < 0.5, "hermitian.r0 must lie in (0, 0.5)");
  for (double f : s.hermitian.s_fractions) {
    check(f > 0.0 && f <= 1.0, "hermitian.s_fractions must lie in (0, 1]");
  }
  for (int k : s.hermitian.k_list) check(k >= 1, "hermitian.k_list entries must be positive");
  check(s.hermitian.profile_points >= 2, "hermitian.profile_points must be at least 2");
  if (s.kind == "hermitian") check(s.n == 1, "the hermitian pipeline needs grid.n = 1");
  return s;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_scenario(j);
}

json to_json(const Scenario& s) {
  json j{{"schema", s.schema},
         {"name", s.name},
         {"kind", s.kind},
         {"operator", {{"type", s.op.type}, {"k", s.op.k}}},
         {"grid", {{"n", s.n}, {"N", s.N}}},
         {"metric",
          {{"type", s.metric.type},
           {"t", s.metric.t},
           {"exponent", s.metric.exponent},
           {"amplitude", s.metric.amplitude},
           {"seed", s.metric.seed},
           {"modes", s.metric.modes},
           {"max_frequency", s.metric.max_frequency}}},
         {"chi", {{"scale", s.chi_scale}}},
         {"F",
          {{"constant", s.F.constant},
           {"amplitude", s.F.amplitude},
           {"seed", s.F.seed},
           {"modes", s.F.modes},
           {"max_frequency", s.F.max_frequency}}},
         {"delta", s.delta},
         {"kappa1", s.kappa1},
         {"q", s.q},
         {"p", s.p},
         {"tolerance",
          {{"newton", s.tol.newton},
           {"max_iter", s.tol.max_iter},
           {"krylov_max_iter", s.tol.krylov_max_iter},
           {"slack_factor", s.tol.slack_factor},
           {"eigen_chain", s.tol.eigen_chain}}},
         {"certificate",
          {{"kind", s.cert.kind}, {"directions", s.cert.directions}, {"T_max", s.cert.T_max}}},
         {"aux",
          {{"s_fractions", s.aux.s_fractions},
           {"k_list", s.aux.k_list},
           {"profile_points", s.aux.profile_points},
           {"profile_extend", s.aux.profile_extend},
           {"psh_samples", s.aux.psh_samples},
           {"v_samples", s.aux.v_samples}}},
         {"sweep",
          {{"t_list", s.sweep.t_list},
           {"A", s.sweep.A},
           {"K", s.sweep.K},
           {"gamma_floor", s.sweep.gamma_floor}}},
         {"hermitian",
          {{"r0", s.hermitian.r0},
           {"s_fractions", s.hermitian.s_fractions},
           {"k_list", s.hermitian.k_list},
           {"profile_points", s.hermitian.profile_points}}},
         {"outputs", {{"snapshot", s.snapshot}, {"snapshot_csv", s.snapshot_csv}}},
         {"seed", s.seed}};
  j["R"] = s.R ? json(*s.R) : json("derive");
  if (s.kappa2) j["kappa2"] = *s.kappa2;
  if (s.eigen_chain_delta) j["eigen_chain_delta"] = *s.eigen_chain_delta;
  json c = json::object();
  if (s.C0) c["C0"] = *s.C0;
  if (s.C1) c["C1"] = *s.C1;
  if (!c.empty()) j["constants"] = c;
  return j;
}

// ---------------------------------------------------------------- fields

namespace {

ScalarField unit_trig(const TorusGrid& grid, std::uint64_t seed, int modes, int maxf) {
  ScalarField f = random_trig_field(grid, seed, modes, maxf);
  const double m = f.cwiseAbs().maxCoeff();
  if (m > 0.0) f /= m;
  return f;
}

}  // namespace

HermitianMetricField make_metric(const MetricSpec& spec, const TorusGrid& grid) {
  const int n = grid.n();
  if (spec.type == "flat") return HermitianMetricField::constant(grid, HermMatrix::Identity(n, n));
  if (spec.type == "diagonal") {
    HermMatrix m = HermMatrix::Identity(n, n);
    m(0, 0) = std::pow(spec.t, spec.exponent);
    return HermitianMetricField::constant(grid, m);
  }
  if (spec.type == "perturbed") {
    const ScalarField f = unit_trig(grid, spec.seed, spec.modes, spec.max_frequency);
    HermitianMetricField g(n, grid.nodes());
    for (std::int64_t i = 0; i < grid.nodes(); ++i) {
      g.set(i, (1.0 + spec.amplitude * f[i]) * HermMatrix::Identity(n, n));
    }
    return g;
  }
  throw ConfigError("unknown metric type '" + spec.type + "'");
}

ScalarField make_F(const FieldSpec& spec, const TorusGrid& grid) {
  ScalarField F = ScalarField::Constant(grid.nodes(), spec.constant);
  if (spec.amplitude != 0.0) {
    F += spec.amplitude * unit_trig(grid, spec.seed, spec.modes, spec.max_frequency);
  }
  return F;
}

// ---------------------------------------------------------------- pipelines

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double sup_trace(const HermitianMetricField& omega, const HermitianMetricField& chi) {
  return relative_eigs_field(omega, chi).rowwise().sum().maxCoeff();
}

double min_trace(const HermitianMetricField& omega, const HermitianMetricField& chi) {
  return relative_eigs_field(omega, chi).rowwise().sum().minCoeff();
}

SolveOptions solve_options(const Scenario& s) {
  SolveOptions o;
  o.max_iter = s.tol.max_iter;
  o.krylov_max_iter = s.tol.krylov_max_iter;
  return o;
}

struct Setup {
  TorusGrid grid;
  HermitianMetricField omega;
  HermitianMetricField chi;
  ScalarField F;
  ConeOperator op;
  double kappa2 = 0.0;
  double R = 0.0;

  explicit Setup(const Scenario& s, const MetricSpec& metric)
      : grid(s.n, s.N),
        omega(make_metric(metric, grid)),
        chi(s.chi_scale * omega),
        F(make_F(s.F, grid)),
        op(s.op.make(s.n)) {
    kappa2 = s.kappa2 ? *s.kappa2 : sup_trace(omega, chi);
    R = s.R ? *s.R : derive_R_tilde(std::min(s.delta, 0.999999), kappa2);
  }
};

json certificates(const Scenario& s, const Setup& st, const ScalarField& F, bool& pass) {
  json j = json::object();
  pass = true;
  if (s.cert.kind == "delta_R" || s.cert.kind == "both") {
    DeltaROptions o;
    o.T_max = s.cert.T_max;
    const auto c = check_delta_R(st.op, st.grid, st.omega, st.chi, F, s.delta, st.R,
                                 s.cert.directions, s.seed, o);
    j["delta_R"] = to_json(c);
    pass = pass && c.pass;
  }
  if (s.cert.kind == "delta_tilde" || s.cert.kind == "both") {
    const auto c = check_delta_tilde(st.op, st.grid, st.omega, st.chi, F, s.delta);
    j["delta_tilde"] = to_json(c);
    pass = pass && c.pass;
  }
  j["pass"] = pass;
  return j;
}

std::vector<ScalarField> psh_samples(const TorusGrid& grid, const HermitianMetricField& omega,
                                     int count, std::uint64_t seed) {
  std::vector<ScalarField> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(sample_psh(grid, omega, seed * 1000003ULL + static_cast<std::uint64_t>(i)));
  }
  return out;
}

double lq_moment(const ScalarField& psi, const ScalarField& w, double q) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i) m += std::pow(std::max(0.0, -psi[i]), q) * w[i];
  return m / w.sum();
}

double green_constant(const Scenario& s, const TorusGrid& grid, const HermitianMetricField& omega) {
  if (s.C0) return *s.C0;
  if (omega.is_uniform()) return green(grid, omega, 0).C0;
  if (grid.n() > 1 && grid.nodes() > 4096) {
    throw ConfigError("non-uniform metric with n > 1: set constants.C0 (all-pole Green scan too large)");
  }
  std::vector<std::int64_t> poles(static_cast<std::size_t>(grid.nodes()));
  for (std::int64_t i = 0; i < grid.nodes(); ++i) poles[static_cast<std::size_t>(i)] = i;
  return green_C0(grid, omega, poles);
}

void write_snapshots(const Scenario& s, const fs::path& out, const std::string& stem,
                     const TorusGrid& grid, const ScalarField& f, RunResult& res) {
  if (s.snapshot) {
    write_snapshot_bin(out / (stem + ".bin"), grid, f);
    res.files.push_back(stem + ".bin");
  }
  if (s.snapshot_csv) {
    write_snapshot_csv(out / (stem + ".csv"), grid, f);
    res.files.push_back(stem + ".csv");
  }
}

double interp(const LevelSetProfile& p, double x) {
  const auto& sg = p.s_grid;
  const auto& f = p.phi_of_s;
  if (x <= sg.front()) return f.front();
  if (x >= sg.back()) return f.back();
  const auto it = std::upper_bound(sg.begin(), sg.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - sg.begin());
  const double t = (x - sg[j - 1]) / (sg[j] - sg[j - 1]);
  return (1.0 - t) * f[j - 1] + t * f[j];
}

PlotSpec profile_plot(const LevelSetProfile& p, const std::string& title, const std::string& ylabel) {
  PlotSpec ps;
  ps.title = title;
  ps.xlabel = "s";
  ps.ylabel = ylabel;
  ps.series.push_back({"volume fraction", p.s_grid, p.phi_of_s, false});
  if (p.A_of_s.size() == p.s_grid.size()) ps.series.push_back({"A_s", p.s_grid, p.A_of_s, false});
  return ps;
}

RunResult verify_kahler(const Scenario& s, const fs::path& out) {
  const auto t0 = Clock::now();
  RunResult res;
  Setup st(s, s.metric);
  const TorusGrid& grid = st.grid;
  const int n = grid.n();
  const double q = s.q > 0.0 ? s.q : n + 2.0;

  const SolveReport sr = solve_f_torus(st.op, grid, st.omega, st.chi, st.F, s.tol.newton, solve_options(s));
  const ScalarField& phi = sr.solution;
  const ScalarField Feff = effective_F(st.F, sr);
  write_json(out / "solve.json", to_json(sr));
  res.files.push_back("solve.json");
  write_snapshots(s, out, "phi", grid, phi, res);

  bool cert_pass = false;
  const json cert = certificates(s, st, Feff, cert_pass);
  write_json(out / "certificate.json", cert);
  res.files.push_back("certificate.json");

  const double C0 = green_constant(s, grid, st.omega);
  const ScalarField w = volume_weights(grid, st.omega);

  // Lemma checks on psh samples and on fields v with tr chi' + Laplacian v > 0.
  const std::vector<ScalarField> samples = psh_samples(grid, st.omega, s.aux.psh_samples, s.seed);
  std::vector<ScalarField> vs;
  const double scale_v = 0.95 * min_trace(st.omega, st.chi) / n;
  for (int i = 0; i < std::min<int>(s.aux.v_samples, static_cast<int>(samples.size())); ++i) {
    if (scale_v > 0.0) vs.push_back(scale_v * samples[static_cast<std::size_t>(i)]);
  }
  vs.push_back(phi);
  const LemmaReport lemma = lemma_checks(grid, st.omega, samples, st.chi, vs, q, C0);
  write_json(out / "lemma.json", to_json(lemma));
  res.files.push_back("lemma.json");

  // Level profile and auxiliary solves.
  const double sup = -phi.minCoeff();
  std::vector<double> s_list;
  const int m = s.aux.profile_points;
  for (int i = 0; i < m; ++i) s_list.push_back(s.aux.profile_extend * sup * i / (m - 1));
  ChainInputs in;
  in.grid = &grid;
  in.omega = &st.omega;
  in.chi_prime = &st.chi;
  in.phi_prime = &phi;
  in.profile = level_profile(grid, phi, st.omega, s_list);
  in.slack_factor = s.tol.slack_factor;
  double C1 = lemma.Lq_max;
  json aux_json = json::array();
  for (double f : s.aux.s_fractions) {
    for (int k : s.aux.k_list) {
      const double sv = f * sup;
      try {
        AuxSolution a = solve_aux(grid, st.omega, phi, sv, k, s.tol.newton, solve_options(s));
        C1 = std::max(C1, lq_moment(a.report.solution, w, q));
        aux_json.push_back({{"s", sv}, {"k", k}, {"A_sk", a.A_sk}, {"solve", to_json(a.report)}});
        in.aux.push_back({sv, k, a.A_sk, std::move(a.report.solution)});
      } catch (const SolveError& e) {
        if (e.reason() != SolveFailure::EmptySublevel) throw;
        aux_json.push_back({{"s", sv}, {"k", k}, {"skipped", e.what()}});
      }
    }
  }
  if (s.C1) C1 = std::max(C1, *s.C1);

  KahlerParams kp;
  kp.n = n;
  kp.q = q;
  kp.p = s.p;
  kp.delta = s.delta;
  kp.R = st.R;
  kp.kappa1 = s.kappa1;
  kp.kappa2 = st.kappa2;
  kp.C0 = C0;
  kp.C1 = C1;
  in.budget = kahler_constants(kp);
  json bj = to_json(in.budget);
  bj["C1_source"] = s.C1 ? "max(config, measured)" : "measured";
  write_json(out / "budget.json", bj);
  res.files.push_back("budget.json");

  const ChainReport chain = verify_kahler_chain(in);
  json cj = to_json(chain);
  cj["aux"] = aux_json;
  write_json(out / "chain.json", cj);
  res.files.push_back("chain.json");
  profile_table(in.profile).write(out / "profile.csv");
  res.files.push_back("profile.csv");
  write_svg(out / "profile.svg", profile_plot(in.profile, "Sublevel profile of phi'", "phi(s), A_s"));
  res.files.push_back("profile.svg");

  // De Giorgi iteration against both closed forms.
  const KahlerBudget& b = in.budget;
  json dg;
  bool dg_pass = false;
  try {
    const DeGiorgiResult d = de_giorgi(in.profile, b.C3, b.alpha);
    dg = to_json(d);
    dg["level_le_S_literal"] = d.level <= b.S_infty;
    dg["level_le_S_corrected"] = d.level <= b.S_infty_corrected;
    dg_pass = !d.stalled && d.level <= b.S_infty && d.level <= b.S_infty_corrected;
  } catch (const DomainError& e) {
    dg["error"] = e.what();
  }
  const double thr_lit = std::pow(2.0 * b.C3, (b.q - n) / (n * b.q));
  const double thr_cor = std::pow(2.0 * b.C3, -1.0 / b.alpha);
  const double phi_lit = interp(in.profile, b.s0);
  dg["probe"] = {{"s0_literal", b.s0},
                 {"s0_corrected", b.s0_corrected},
                 {"threshold_literal", thr_lit},
                 {"threshold_literal_vacuous", thr_lit >= 1.0},
                 {"threshold_corrected", thr_cor},
                 {"phi_at_s0_literal", phi_lit},
                 {"s0_literal_meets_corrected_threshold", phi_lit <= thr_cor},
                 {"S_infty_literal", b.S_infty},
                 {"S_infty_corrected", b.S_infty_corrected},
                 {"recursion_pass", chain.recursion.pass}};
  dg["pass"] = dg_pass;
  write_json(out / "degiorgi.json", dg);
  res.files.push_back("degiorgi.json");

  json ec_json = nullptr;
  bool ec_pass = true;
  if (s.eigen_chain_delta) {
    const EigenChainReport ec = verify_eigen_chain(st.op, grid, st.omega, st.chi, Feff, phi,
                                                            *s.eigen_chain_delta, s.tol.eigen_chain);
    ec_json = to_json(ec);
    ec_json["delta"] = *s.eigen_chain_delta;
    ec_pass = ec.pass;
    write_json(out / "eigen_chain.json", ec_json);
    res.files.push_back("eigen_chain.json");
  }

  const bool pass = cert_pass && lemma.pass && chain.pass && dg_pass && ec_pass;
  json failed = json::array();
  if (!cert_pass) failed.push_back("certificate (" + s.cert.kind + ")");
  if (!lemma.pass) failed.push_back("lemma");
  if (!chain.pass) failed.push_back("chain");
  if (!dg_pass) failed.push_back("de_giorgi");
  if (!ec_pass) failed.push_back("eigen_chain");
  res.summary = {{"failed", failed},
                 {"name", s.name},
                 {"kind", s.kind},
                 {"sup_neg_phi", sup},
                 {"residual_sup", sr.residual_sup},
                 {"S_infty", b.S_infty},
                 {"S_infty_corrected", b.S_infty_corrected},
                 {"certificate_pass", cert_pass},
                 {"lemma_pass", lemma.pass},
                 {"chain_pass", chain.pass},
                 {"de_giorgi_pass", dg_pass},
                 {"eigen_chain_pass", ec_pass},
                 {"seconds", seconds_since(t0)},
                 {"pass", pass}};
  write_json(out / "verify.json", res.summary);
  res.files.push_back("verify.json");
  res.exit_code = pass ? 0 : 1;
  return res;
}

RunResult verify_hermitian(const Scenario& s, const fs::path& out) {
  const auto t0 = Clock::now();
  RunResult res;
  Setup st(s, s.metric);
  const TorusGrid& grid = st.grid;
  const SolveReport sr = solve_f_torus(st.op, grid, st.omega, st.chi, st.F, s.tol.newton, solve_options(s));
  const ScalarField Feff = effective_F(st.F, sr);
  write_json(out / "solve.json", to_json(sr));
  res.files.push_back("solve.json");
  write_snapshots(s, out, "phi", grid, sr.solution, res);

  bool cert_pass = false;
  const json cert = certificates(s, st, Feff, cert_pass);
  write_json(out / "certificate.json", cert);
  res.files.push_back("certificate.json");

  HermitianParams hp;
  hp.n = 1;
  hp.q = s.q;
  hp.delta = s.delta;
  hp.R = st.R;
  hp.kappa1 = s.kappa1;
  hp.kappa2 = st.kappa2;
  hp.r0 = s.hermitian.r0;
  HermitianOptions ho;
  ho.s_fractions = s.hermitian.s_fractions;
  ho.k_list = s.hermitian.k_list;
  ho.profile_points = s.hermitian.profile_points;
  ho.slack_factor = s.tol.slack_factor;
  const HermitianReport hr = hermitian_budget(hp, grid, st.omega, st.chi, sr.solution, ho);
  write_json(out / "hermitian.json", to_json(hr));
  res.files.push_back("hermitian.json");
  write_json(out / "budget.json", to_json(hr.budget));
  res.files.push_back("budget.json");
  profile_table(hr.profile).write(out / "profile.csv");
  res.files.push_back("profile.csv");
  write_svg(out / "profile.svg", profile_plot(hr.profile, "Disc level volumes", "vol(U_s), A_s"));
  res.files.push_back("profile.svg");

  const bool pass = cert_pass && hr.pass;
  json failed = json::array();
  if (!cert_pass) failed.push_back("certificate (" + s.cert.kind + ")");
  if (!hr.pass) failed.push_back("hermitian");
  res.summary = {{"failed", failed},
                 {"name", s.name},
                 {"kind", s.kind},
                 {"observed", hr.observed},
                 {"final_bound", hr.budget.final_bound},
                 {"residual_sup", sr.residual_sup},
                 {"certificate_pass", cert_pass},
                 {"hermitian_pass", hr.pass},
                 {"seconds", seconds_since(t0)},
                 {"pass", pass}};
  write_json(out / "verify.json", res.summary);
  res.files.push_back("verify.json");
  res.exit_code = pass ? 0 : 1;
  return res;
}

}  // namespace

RunResult run_check(const Scenario& s, const fs::path& out) {
  RunResult res;
  Setup st(s, s.metric);
  bool pass = false;
  json cert = certificates(s, st, st.F, pass);
  cert["R"] = st.R;
  cert["kappa2"] = st.kappa2;
  write_json(out / "certificate.json", cert);
  res.files.push_back("certificate.json");
  res.summary = cert;
  res.exit_code = pass ? 0 : 1;
  return res;
}

RunResult run_verify(const Scenario& s, const fs::path& out) {
  if (s.kind == "hermitian") return verify_hermitian(s, out);
  if (s.kind == "kahler") return verify_kahler(s, out);
  throw ConfigError("verify runs kahler or hermitian scenarios; use sweep for kind 'sweep'");
}

RunResult run_sweep(const Scenario& s, const fs::path& out) {
  if (s.sweep.t_list.empty()) throw ConfigError("sweep.t_list is empty");
  const auto t0 = Clock::now();
  const int n = s.n;
  const double q = s.q > 0.0 ? s.q : n + 2.0;
  const double p = s.p > 0.0 ? s.p : n + 1.0;

  struct Row {
    double t = 0.0;
    bool ok = false, kset = false, cert = false;
    double gamma_min = 0.0, N_p = 0.0, pairing = 0.0, C0 = 0.0, C1 = 0.0, sup = 0.0, residual = 0.0;
    std::string status = "ok";
  };
  std::vector<Row> rows;
  double kappa2 = 0.0, R = 0.0;
  for (double t : s.sweep.t_list) {
    Row row;
    row.t = t;
    try {
      MetricSpec m = s.metric;
      m.type = "diagonal";
      m.t = t;
      Setup st(s, m);
      kappa2 = std::max(kappa2, st.kappa2);
      R = st.R;
      const HermitianMetricField omega_X =
          HermitianMetricField::constant(st.grid, HermMatrix::Identity(n, n));
      const MetricFunctionals mf = metric_functionals(st.grid, st.omega, omega_X, p);
      row.gamma_min = mf.gamma_min;
      row.N_p = mf.N_p;
      row.pairing = mf.pairing;
      row.kset = kset_membership(mf, s.sweep.A, s.sweep.K,
                                 ScalarField::Constant(1, s.sweep.gamma_floor));
      row.C0 = green_constant(s, st.grid, st.omega);
      const ScalarField w = volume_weights(st.grid, st.omega);
      for (const ScalarField& psi : psh_samples(st.grid, st.omega, s.aux.psh_samples, s.seed)) {
        row.C1 = std::max(row.C1, lq_moment(psi, w, q));
      }
      const SolveReport sr =
          solve_f_torus(st.op, st.grid, st.omega, st.chi, st.F, s.tol.newton, solve_options(s));
      row.sup = -sr.solution.minCoeff();
      row.residual = sr.residual_sup;
      bool cp = false;
      (void)certificates(s, st, effective_F(st.F, sr), cp);
      row.cert = cp;
      row.ok = true;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      row.status = e.what();
    }
    rows.push_back(row);
  }

  double C0 = 0.0, C1 = 0.0;
  for (const Row& r : rows) {
    if (!r.ok) continue;
    C0 = std::max(C0, r.C0);
    C1 = std::max(C1, r.C1);
  }
  if (s.C0) C0 = std::max(C0, *s.C0);
  if (s.C1) C1 = std::max(C1, *s.C1);

  RunResult res;
  bool pass = true;
  KahlerBudget b;
  const bool any = C0 > 0.0 && C1 > 0.0;
  if (any) {
    KahlerParams kp;
    kp.n = n;
    kp.q = q;
    kp.p = p;
    kp.delta = s.delta;
    kp.R = R;
    kp.kappa1 = s.kappa1;
    kp.kappa2 = kappa2;
    kp.C0 = C0;
    kp.C1 = C1;
    b = kahler_constants(kp);
  } else {
    pass = false;
  }

  CsvTable table({"t", "kset_membership", "gamma_min", "N_p", "pairing", "C0", "C1", "sup_neg_phi",
                  "S_infty", "S_infty_corrected", "margin", "margin_corrected", "certificate",
                  "residual", "status"});
  json jrows = json::array();
  std::vector<double> ts, sups, sinf;
  for (const Row& r : rows) {
    const double margin = b.S_infty - r.sup, margin_c = b.S_infty_corrected - r.sup;
    const bool row_pass = r.ok && r.kset && r.cert && margin > 0.0 && margin_c > 0.0;
    pass = pass && row_pass;
    table.add_row(std::vector<std::string>{
        format_double(r.t), r.kset ? "true" : "false", format_double(r.gamma_min),
        format_double(r.N_p), format_double(r.pairing), format_double(r.C0), format_double(r.C1),
        r.ok ? format_double(r.sup) : "nan", format_double(b.S_infty),
        format_double(b.S_infty_corrected), r.ok ? format_double(margin) : "nan",
        r.ok ? format_double(margin_c) : "nan", r.cert ? "pass" : "fail", format_double(r.residual),
        r.status});
    jrows.push_back({{"t", r.t},
                     {"ok", r.ok},
                     {"kset_membership", r.kset},
                     {"gamma_min", r.gamma_min},
                     {"N_p", r.N_p},
                     {"pairing", r.pairing},
                     {"C0", r.C0},
                     {"C1", r.C1},
                     {"sup_neg_phi", r.sup},
                     {"S_infty", b.S_infty},
                     {"S_infty_corrected", b.S_infty_corrected},
                     {"margin", margin},
                     {"margin_corrected", margin_c},
                     {"certificate_pass", r.cert},
                     {"residual", r.residual},
                     {"status", r.status},
                     {"pass", row_pass}});
    if (r.ok) {
      ts.push_back(r.t);
      sups.push_back(r.sup);
      sinf.push_back(b.S_infty);
    }
  }
  table.write(out / "sweep.csv");
  res.files.push_back("sweep.csv");

  PlotSpec ps;
  ps.title = "Degeneration sweep";
  ps.xlabel = "t";
  ps.ylabel = "sup(-phi')";
  ps.log_x = true;
  ps.series.push_back({"sup(-phi'_t)", ts, sups, true});
  ps.hlines.push_back({"S_infty", b.S_infty});
  write_svg(out / "sweep.svg", ps);
  res.files.push_back("sweep.svg");

  const bool constant_S = std::all_of(sinf.begin(), sinf.end(), [&](double v) { return v == b.S_infty; });
  res.summary = {{"name", s.name},
                 {"rows", jrows},
                 {"budget", to_json(b)},
                 {"S_infty_constant", constant_S},
                 {"seconds", seconds_since(t0)},
                 {"pass", pass && constant_S}};
  write_json(out / "sweep.json", res.summary);
  res.files.push_back("sweep.json");
  res.exit_code = pass && constant_S ? 0 : 1;
  return res;
}

RunResult run_budget(const Scenario& s, const fs::path& out) {
  RunResult res;
  Setup st(s, s.metric);
  json j;
  if (s.kind == "hermitian") {
    HermitianParams hp;
    hp.n = s.n;
    hp.q = s.q;
    hp.delta = s.delta;
    hp.R = st.R;
    hp.kappa1 = s.kappa1;
    hp.kappa2 = st.kappa2;
    hp.r0 = s.hermitian.r0;
    j = to_json(hermitian_constants(hp));
  } else {
    const double q = s.q > 0.0 ? s.q : s.n + 2.0;
    double C1 = 0.0;
    if (s.C1) {
      C1 = *s.C1;
    } else {
      const ScalarField w = volume_weights(st.grid, st.omega);
      for (const ScalarField& psi : psh_samples(st.grid, st.omega, s.aux.psh_samples, s.seed)) {
        C1 = std::max(C1, lq_moment(psi, w, q));
      }
    }
    KahlerParams kp;
    kp.n = s.n;
    kp.q = q;
    kp.p = s.p;
    kp.delta = s.delta;
    kp.R = st.R;
    kp.kappa1 = s.kappa1;
    kp.kappa2 = st.kappa2;
    kp.C0 = green_constant(s, st.grid, st.omega);
    kp.C1 = C1;
    j = to_json(kahler_constants(kp));
    j["C1_source"] = s.C1 ? "config" : "measured";
  }
  j["pass"] = true;
  write_json(out / "budget.json", j);
  res.files.push_back("budget.json");
  res.summary = j;
  return res;
}

RunResult run_report(const fs::path& out) {
  if (!fs::is_directory(out)) throw ConfigError("output directory " + out.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(out)) {
    if (e.is_regular_file() && e.path().extension() == ".json" && e.path().filename() != "report.json") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  json arts = json::object();
  bool all = true;
  int counted = 0;
  for (const fs::path& f : files) {
    std::ifstream in(f);
    json j;
    try {
      in >> j;
    } catch (const json::exception&) {
      arts[f.filename().string()] = "unreadable";
      all = false;
      continue;
    }
    if (j.is_object() && j.contains("pass") && j["pass"].is_boolean()) {
      const bool p = j["pass"].get<bool>();
      arts[f.filename().string()] = p;
      all = all && p;
      ++counted;
    } else {
      arts[f.filename().string()] = nullptr;
    }
  }
  RunResult res;
  res.summary = {{"artifacts", arts}, {"checked", counted}, {"pass", all && counted > 0}};
  write_json(out / "report.json", res.summary);
  res.files.push_back("report.json");
  res.exit_code = all && counted > 0 ? 0 : 1;
  return res;
}

}  // namespace linf
