#pragma once

// Explicit constants of the sup estimates, the comparison functions, the
// inequality chain checked on solved instances and the De Giorgi iteration.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "linf/solve.hpp"
#include "linf/symfun.hpp"
#include "linf/torus.hpp"

namespace linf {

struct KahlerParams {
  int n = 2;
  double q = 0.0;  // 0 selects n + 2
  double p = 0.0;  // 0 selects n + 1
  double delta = 0.5;
  double R = 1.0;
  double kappa1 = 0.0;
  double kappa2 = 1.0;
  double C0 = 1.0;
  double C1 = 1.0;
};

struct KahlerBudget {
  int n = 0;
  double q = 0.0, p = 0.0;
  double delta = 0.0, R = 0.0, kappa1 = 0.0, kappa2 = 0.0;
  double C0 = 0.0, C1 = 0.0, C7 = 0.0;
  double beta1 = 0.0, beta2 = 0.0, Lambda_max = 0.0;
  double C2 = 0.0, C3 = 0.0;
  /// Recursion exponent excess 1/n - 1/q.
  double alpha = 0.0;
  /// As printed: s0 = C7 (2 C3)^{-(q-n)/nq}, S = s0 + 1/(1 - 2^{-nq/(q-n)}).
  double s0 = 0.0, S_infty = 0.0;
  /// From the De Giorgi lemma with r_j = 2 C3 phi(s_j)^alpha <= 1:
  /// phi(s0) <= (2 C3)^{-1/alpha}, s0 = C7 (2 C3)^{1/alpha}, S = s0 + 1/(1 - 2^{-alpha}).
  double s0_corrected = 0.0, S_infty_corrected = 0.0;
};

KahlerBudget kahler_constants(const KahlerParams& params);

struct SupLevels {
  double s0 = 0.0, S_infty = 0.0, s0_corrected = 0.0, S_infty_corrected = 0.0;
};

/// The two closed forms of KahlerBudget from C3 and C7 alone.
SupLevels sup_levels(int n, double q, double C3, double C7);
nlohmann::json to_json(const KahlerBudget& b);

struct PsiField {
  ScalarField field;
  /// Max over the sublevel set {phi' < -s}; -infinity when it is empty.
  double max_value = -std::numeric_limits<double>::infinity();
  std::int64_t argmax = -1;
};

/// Psi = -eps (-psi + Lambda)^{n/(n+1)} - phi' - s.
PsiField comparison_psi(const ScalarField& phi_prime, const ScalarField& psi_sk, double s,
                        double eps, double Lambda, int n);

struct ComparisonConstants {
  double R = 0.0, eps = 0.0, Lambda = 0.0;
};

ComparisonConstants comparison_constants(int n, double delta, double kappa2, double A_sk);

/// One auxiliary solve used by the chain.
struct AuxRecord {
  double s = 0.0;
  int k = 0;
  double A_sk = 0.0;
  ScalarField psi;
};

struct ChainInputs {
  const TorusGrid* grid = nullptr;
  const HermitianMetricField* omega = nullptr;
  const HermitianMetricField* chi_prime = nullptr;
  const ScalarField* phi_prime = nullptr;
  std::vector<AuxRecord> aux;
  KahlerBudget budget;
  LevelSetProfile profile;
  /// slack(h) = slack_factor h^2 max(1, sup(-phi')).
  double slack_factor = 10.0;
};

struct ChainEntry {
  double s = 0.0;
  int k = 0;
  double A_sk = 0.0, eps = 0.0, Lambda = 0.0;
  std::int64_t sublevel_nodes = 0;
  double psi_max = 0.0;          // (b) max Psi over the sublevel set
  double pointwise_worst = 0.0;  // max (lhs - rhs) of the pointwise inequality
  bool pointwise_matches_psi = true;  // pointwise inequality <=> Psi <= 0, node by node
  std::int64_t flagged_nodes = 0;
  double radius_max = 0.0;       // (a) max |lambda| over flagged nodes
  double flagged_min_gap = 0.0;  // min eigenvalue of ddbar phi' + delta omega there
  double integral_lhs = 0.0;     // (c)
  double integral_rhs = 0.0;     // with the measured (1/V) int (-psi)^q
  double integral_rhs_C1 = 0.0;  // with C1
  double Iq = 0.0;
  bool pass = false;
};

struct RecursionCheck {
  std::int64_t pairs = 0;
  double worst_ratio = 0.0;    // max r phi(s+r) / (C3 phi(s)^{1+alpha})
  double worst_As_ratio = 0.0;  // max A_s / (C3 phi(s)^{1+alpha})
  bool pass = false;
};

/// Grid pairs s < s' with r = s' - s in (0,1): r phi(s') <= C phi(s)^{1+alpha},
/// and A_s <= C phi(s)^{1+alpha} where the profile carries A.
RecursionCheck check_recursion(const LevelSetProfile& profile, double C, double alpha);

struct ChainReport {
  double slack = 0.0;
  std::vector<ChainEntry> entries;
  RecursionCheck recursion;
  double sup_neg_phi = 0.0;
  bool sup_within_literal = false;
  bool sup_within_corrected = false;
  bool psi_pass = false;
  bool ball_pass = false;
  bool pointwise_pass = false;
  bool integral_pass = false;
  bool pass = false;
};

ChainReport verify_kahler_chain(const ChainInputs& in);
nlohmann::json to_json(const ChainReport& r);

struct DeGiorgiResult {
  double start = 0.0;
  double level = 0.0;
  double threshold = 0.0;
  int steps = 0;
  /// Stopped on the step cap or a vanishing step rather than phi = 0.
  bool stalled = false;
};

/// s_{j+1} = s_j + 2 C phi(s_j)^alpha from the first grid s with
/// phi(s) <= (2C)^{-1/alpha}; phi is interpolated linearly and held at its
/// last value past the grid.
DeGiorgiResult de_giorgi(const LevelSetProfile& profile, double C, double alpha);
nlohmann::json to_json(const DeGiorgiResult& r);

struct LemmaReport {
  int samples = 0;
  double C0 = 0.0;
  double L1_max = 0.0, L1_bound = 0.0;  // (1/V) int (-psi) vs 2 n C0
  double Lq_max = 0.0;                  // measured C1
  double q = 0.0;
  double v_max = 0.0, v_bound = 0.0;    // (1/V) int (-v) vs 2 kappa2 C0
  int v_samples = 0;
  int violations = 0;
  bool pass = false;
};

/// samples: omega-psh fields with sup = 0. vs: fields with sup = 0 and
/// tr_omega chi' + Laplacian v > 0; kappa2 = sup tr_omega chi'.
LemmaReport lemma_checks(const TorusGrid& grid, const HermitianMetricField& omega,
                         const std::vector<ScalarField>& samples,
                         const HermitianMetricField& chi_prime, const std::vector<ScalarField>& vs,
                         double q, double C0);
nlohmann::json to_json(const LemmaReport& r);

struct EigenChainReport {
  std::int64_t flagged_nodes = 0;
  double lower_slack = 0.0;  // min lambda_i - (1 - delta/2) mu_i
  double upper_slack = 0.0;  // min (2 - delta)(1 - delta) mu_i / delta - lambda_i
  std::int64_t worst_node = -1;
  double tol = 0.0;
  bool pass = false;
};

/// Throws PreconditionError unless chi' is a delta-subsolution for F.
EigenChainReport verify_eigen_chain(const ConeOperator& op, const TorusGrid& grid,
                                             const HermitianMetricField& omega,
                                             const HermitianMetricField& chi_prime,
                                             const ScalarField& F, const ScalarField& phi_prime,
                                             double delta, double tol);
nlohmann::json to_json(const EigenChainReport& r);

}  // namespace linf
