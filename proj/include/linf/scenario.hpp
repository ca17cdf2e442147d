#pragma once

// Scenario files (versioned JSON, unknown keys rejected) and the batch
// pipelines behind the command line verbs.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "linf/symfun.hpp"
#include "linf/torus.hpp"

namespace linf {

inline constexpr const char* kScenarioSchema = "linf-lab/scenario/v1";

struct OperatorSpec {
  std::string type = "J";  // J, MongeAmpere, SigmaK, HessianQuotient
  int k = 1;
  ConeOperator make(int n) const;
};

struct MetricSpec {
  std::string type = "flat";  // flat, diagonal, perturbed
  double t = 1.0;             // diagonal: omega = diag(t^exponent, 1, ..., 1)
  double exponent = 1.0;
  double amplitude = 0.0;     // perturbed: omega = (1 + amplitude f) I, sup |f| = 1
  std::uint64_t seed = 1;
  int modes = 4;
  int max_frequency = 2;
};

struct FieldSpec {
  double constant = 0.0;
  double amplitude = 0.0;  // sup of the trigonometric part
  std::uint64_t seed = 11;
  int modes = 6;
  int max_frequency = 2;
};

struct ToleranceSpec {
  double newton = 1e-10;
  int max_iter = 200;
  int krylov_max_iter = 400;
  double slack_factor = 10.0;
  double eigen_chain = 1e-8;
};

struct CertificateSpec {
  std::string kind = "both";  // delta_R, delta_tilde, both
  int directions = 512;
  double T_max = 1e6;
};

struct AuxSpec {
  std::vector<double> s_fractions{0.0, 0.25, 0.5};
  std::vector<int> k_list{10, 100};
  int profile_points = 101;
  double profile_extend = 1.02;
  int psh_samples = 20;
  int v_samples = 10;
};

struct SweepSpec {
  std::vector<double> t_list;
  double A = 1.0;
  double K = 1.0;
  double gamma_floor = 0.5;
};

struct HermitianSpec {
  double r0 = 0.4;
  std::vector<double> s_fractions{0.25, 0.5, 0.75, 1.0};
  std::vector<int> k_list{10, 100, 1000};
  int profile_points = 64;
};

struct Scenario {
  std::string schema = kScenarioSchema;
  std::string name = "scenario";
  std::string kind = "kahler";  // kahler, hermitian, sweep
  OperatorSpec op;
  int n = 2;
  int N = 16;
  MetricSpec metric;
  double chi_scale = 3.0;  // chi' = chi_scale omega
  FieldSpec F;
  double delta = 0.5;
  std::optional<double> R;  // unset: derive_R_tilde(delta, kappa2)
  double kappa1 = 0.0;
  std::optional<double> kappa2;  // unset: sup tr_omega chi'
  double q = 0.0;
  double p = 0.0;
  std::optional<double> eigen_chain_delta;
  std::optional<double> C0, C1;
  ToleranceSpec tol;
  CertificateSpec cert;
  AuxSpec aux;
  SweepSpec sweep;
  HermitianSpec hermitian;
  bool snapshot = true;
  bool snapshot_csv = false;
  std::uint64_t seed = 1;
};

/// Throws ConfigError on unknown keys, wrong types or out-of-range values.
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const Scenario& s);

HermitianMetricField make_metric(const MetricSpec& spec, const TorusGrid& grid);
ScalarField make_F(const FieldSpec& spec, const TorusGrid& grid);

struct RunResult {
  int exit_code = 0;  // 0 pass, 1 fail
  nlohmann::json summary;
  std::vector<std::string> files;
};

RunResult run_check(const Scenario& s, const std::filesystem::path& out);
RunResult run_verify(const Scenario& s, const std::filesystem::path& out);
/// Throws ConfigError for an empty t-list.
RunResult run_sweep(const Scenario& s, const std::filesystem::path& out);
RunResult run_budget(const Scenario& s, const std::filesystem::path& out);
/// Collects the pass flags of every JSON artifact in out into report.json.
RunResult run_report(const std::filesystem::path& out);

}  // namespace linf
