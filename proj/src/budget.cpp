#include "linf/budget.hpp"

#include <algorithm>
#include <cmath>

#include "linf/error.hpp"
#include "linf/subsol.hpp"

namespace linf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

double sup_neg(const ScalarField& phi) { return phi.size() ? -phi.minCoeff() : 0.0; }

}  // namespace

KahlerBudget kahler_constants(const KahlerParams& in) {
  require(in.n >= 1, "n must be positive");
  KahlerBudget b;
  b.n = in.n;
  const double n = in.n;
  b.q = in.q > 0.0 ? in.q : n + 2.0;
  b.p = in.p > 0.0 ? in.p : n + 1.0;
  require(b.q > n, "q must exceed n");
  require(b.p > n, "p must exceed n");
  require(in.delta > 0.0, "delta must be positive");
  require(in.R > 0.0, "R must be positive");
  require(in.kappa1 >= 0.0 && in.kappa2 >= 0.0, "kappa1 and kappa2 must be non-negative");
  require(in.C0 > 0.0 && in.C1 > 0.0, "C0 and C1 must be positive");
  b.delta = in.delta;
  b.R = in.R;
  b.kappa1 = in.kappa1;
  b.kappa2 = in.kappa2;
  b.C0 = in.C0;
  b.C1 = in.C1;

  const double m = b.R + b.delta + b.kappa1;
  b.beta1 = std::pow((n + 1.0) / n * m, n / (n + 1.0));
  b.beta2 = n / (n + 1.0) * std::pow(1.0 / b.delta, n + 1.0) * std::pow(m, n);
  b.C7 = 2.0 * b.kappa2 * b.C0;
  b.Lambda_max = b.beta2 * b.C7;
  b.C2 = std::pow(2.0, b.q - 1.0) * std::pow(b.beta1, b.q * (n + 1.0) / n);
  b.C3 = std::pow(b.C2 * (b.C1 + std::pow(b.Lambda_max, b.q)), 1.0 / b.q);
  b.alpha = (b.q - n) / (n * b.q);

  const SupLevels lv = sup_levels(in.n, b.q, b.C3, b.C7);
  b.s0 = lv.s0;
  b.S_infty = lv.S_infty;
  b.s0_corrected = lv.s0_corrected;
  b.S_infty_corrected = lv.S_infty_corrected;
  return b;
}

SupLevels sup_levels(int n, double q, double C3, double C7) {
  require(n >= 1 && q > n, "need q > n >= 1");
  require(C3 > 0.0 && C7 >= 0.0, "need C3 > 0 and C7 >= 0");
  const double alpha = (q - n) / (n * q);
  SupLevels lv;
  lv.s0 = C7 * std::pow(2.0 * C3, -alpha);
  lv.S_infty = lv.s0 + 1.0 / (1.0 - std::pow(2.0, -1.0 / alpha));
  lv.s0_corrected = C7 * std::pow(2.0 * C3, 1.0 / alpha);
  lv.S_infty_corrected = lv.s0_corrected + 1.0 / (1.0 - std::pow(2.0, -alpha));
  return lv;
}

nlohmann::json to_json(const KahlerBudget& b) {
  return {{"n", b.n},           {"q", b.q},
          {"p", b.p},           {"delta", b.delta},
          {"R", b.R},           {"kappa1", b.kappa1},
          {"kappa2", b.kappa2}, {"C0", b.C0},
          {"C1", b.C1},         {"C7", b.C7},
          {"beta1", b.beta1},   {"beta2", b.beta2},
          {"Lambda_max", b.Lambda_max}, {"C2", b.C2},
          {"C3", b.C3},         {"alpha", b.alpha},
          {"s0", b.s0},         {"S_infty", b.S_infty},
          {"s0_corrected", b.s0_corrected},
          {"S_infty_corrected", b.S_infty_corrected}};
}

PsiField comparison_psi(const ScalarField& phi_prime, const ScalarField& psi_sk, double s,
                        double eps, double Lambda, int n) {
  require(phi_prime.size() == psi_sk.size(), "field sizes differ");
  require(n >= 1, "n must be positive");
  const double e = n / (n + 1.0);
  PsiField out;
  out.field.resize(phi_prime.size());
  for (Eigen::Index i = 0; i < phi_prime.size(); ++i) {
    const double base = std::max(0.0, -psi_sk[i] + Lambda);
    out.field[i] = -eps * std::pow(base, e) - phi_prime[i] - s;
    if (phi_prime[i] < -s && out.field[i] > out.max_value) {
      out.max_value = out.field[i];
      out.argmax = i;
    }
  }
  return out;
}

ComparisonConstants comparison_constants(int n, double delta, double kappa2, double A_sk) {
  require(n >= 1, "n must be positive");
  require(A_sk >= 0.0, "A_sk must be non-negative");
  ComparisonConstants c;
  c.R = derive_R_tilde(delta, kappa2);
  const double nn = n;
  c.eps = std::pow((nn + 1.0) * c.R / nn, nn / (nn + 1.0)) * std::pow(A_sk, 1.0 / (nn + 1.0));
  c.Lambda = std::pow(2.0 * nn * kappa2 * c.eps / ((nn + 1.0) * delta), nn + 1.0);
  return c;
}

RecursionCheck check_recursion(const LevelSetProfile& p, double C, double alpha) {
  require(C > 0.0 && alpha > 0.0, "C and alpha must be positive");
  require(p.phi_of_s.size() == p.s_grid.size(), "profile sizes differ");
  const bool with_A = p.A_of_s.size() == p.s_grid.size();
  RecursionCheck rc;
  const std::size_t m = p.s_grid.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double rhs = C * std::pow(p.phi_of_s[i], 1.0 + alpha);
    if (with_A) {
      const double ratio = rhs > 0.0 ? p.A_of_s[i] / rhs : (p.A_of_s[i] > 0.0 ? kInf : 0.0);
      rc.worst_As_ratio = std::max(rc.worst_As_ratio, ratio);
    }
    for (std::size_t j = i + 1; j < m; ++j) {
      const double r = p.s_grid[j] - p.s_grid[i];
      if (!(r > 0.0 && r < 1.0)) continue;
      ++rc.pairs;
      const double lhs = r * p.phi_of_s[j];
      const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? kInf : 0.0);
      rc.worst_ratio = std::max(rc.worst_ratio, ratio);
    }
  }
  rc.pass = rc.worst_ratio <= 1.0 && rc.worst_As_ratio <= 1.0;
  return rc;
}

ChainReport verify_kahler_chain(const ChainInputs& in) {
  if (!in.grid || !in.omega || !in.chi_prime || !in.phi_prime) {
    throw DomainError("chain verification is missing run artifacts");
  }
  const TorusGrid& grid = *in.grid;
  const HermitianMetricField& omega = *in.omega;
  const ScalarField& phi = *in.phi_prime;
  const KahlerBudget& b = in.budget;
  const int n = grid.n();
  const double nn = n;
  if (phi.size() != grid.nodes()) throw DomainError("phi' does not match the grid");

  ChainReport rep;
  rep.sup_neg_phi = sup_neg(phi);
  rep.slack = in.slack_factor * grid.h() * grid.h() * std::max(1.0, rep.sup_neg_phi);

  const ScalarField w = volume_weights(grid, omega);
  const double V = w.sum();
  const HermitianMetricField dphi = ddbar(grid, phi);
  const Eigen::MatrixXd lam = relative_eigs_field(omega, *in.chi_prime + dphi);
  const Eigen::MatrixXd gap = relative_eigs_field(omega, dphi + b.delta * omega);

  rep.psi_pass = rep.ball_pass = rep.pointwise_pass = rep.integral_pass = true;
  for (const AuxRecord& a : in.aux) {
    if (a.psi.size() != grid.nodes()) throw DomainError("auxiliary solution does not match the grid");
    ChainEntry e;
    e.s = a.s;
    e.k = a.k;
    e.A_sk = a.A_sk;
    e.eps = b.beta1 * std::pow(a.A_sk, 1.0 / (nn + 1.0));
    e.Lambda = b.beta2 * a.A_sk;
    const PsiField P = comparison_psi(phi, a.psi, a.s, e.eps, e.Lambda, n);
    e.psi_max = P.max_value;

    const Eigen::MatrixXd dpsi_eigs = relative_eigs_field(omega, ddbar(grid, P.field));
    const double c4 = std::pow(b.beta1, (nn + 1.0) / nn) * std::pow(a.A_sk, 1.0 / nn);
    const double ex = b.q * (nn + 1.0) / nn;
    e.pointwise_worst = -kInf;
    e.radius_max = 0.0;
    e.flagged_min_gap = kInf;
    double lhs_int = 0.0, lhs_int_slack = 0.0, Iq = 0.0;
    bool pointwise_ok = true;
    for (std::int64_t i = 0; i < grid.nodes(); ++i) {
      Iq += std::pow(std::max(0.0, -a.psi[i]), b.q) * w[i];
      if (!(phi[i] < -a.s)) continue;
      ++e.sublevel_nodes;
      const double x = -phi[i] - a.s;
      const double prhs = c4 * (-a.psi[i] + e.Lambda);
      const double plhs = std::pow(x, (nn + 1.0) / nn);
      e.pointwise_worst = std::max(e.pointwise_worst, plhs - prhs);
      if (std::abs(P.field[i]) > 1e-12 * std::max(1.0, x) && (P.field[i] <= 0.0) != (plhs <= prhs)) {
        e.pointwise_matches_psi = false;
      }
      const double xs = std::max(0.0, x - rep.slack);
      if (std::pow(xs, (nn + 1.0) / nn) > prhs) pointwise_ok = false;
      lhs_int += std::pow(x, ex) * w[i];
      lhs_int_slack += std::pow(xs, ex) * w[i];
      if (dpsi_eigs(i, n - 1) <= 0.0) {
        ++e.flagged_nodes;
        e.radius_max = std::max(e.radius_max, lam.row(i).norm());
        e.flagged_min_gap = std::min(e.flagged_min_gap, gap(i, 0));
      }
    }
    e.Iq = Iq / V;
    e.integral_lhs = lhs_int / V;
    e.integral_rhs = b.C2 * std::pow(a.A_sk, b.q / nn) * (e.Iq + std::pow(e.Lambda, b.q));
    e.integral_rhs_C1 = b.C2 * (b.C1 + std::pow(e.Lambda, b.q)) * std::pow(a.A_sk, b.q / nn);

    const bool psi_ok = e.psi_max <= rep.slack;
    const bool ball_ok = e.radius_max <= b.R;
    const bool int_ok = lhs_int_slack / V <= e.integral_rhs && lhs_int_slack / V <= e.integral_rhs_C1;
    e.pass = psi_ok && ball_ok && pointwise_ok && e.pointwise_matches_psi && int_ok;
    rep.psi_pass = rep.psi_pass && psi_ok;
    rep.ball_pass = rep.ball_pass && ball_ok;
    rep.pointwise_pass = rep.pointwise_pass && pointwise_ok && e.pointwise_matches_psi;
    rep.integral_pass = rep.integral_pass && int_ok;
    rep.entries.push_back(std::move(e));
  }

  rep.recursion = check_recursion(in.profile, b.C3, b.alpha);
  rep.sup_within_literal = rep.sup_neg_phi <= b.S_infty + rep.slack;
  rep.sup_within_corrected = rep.sup_neg_phi <= b.S_infty_corrected + rep.slack;
  rep.pass = rep.psi_pass && rep.ball_pass && rep.pointwise_pass && rep.integral_pass &&
             rep.recursion.pass && rep.sup_within_literal && rep.sup_within_corrected;
  return rep;
}

nlohmann::json to_json(const ChainReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const ChainEntry& e : r.entries) {
    entries.push_back({{"s", e.s},
                       {"k", e.k},
                       {"A_sk", e.A_sk},
                       {"eps", e.eps},
                       {"Lambda", e.Lambda},
                       {"sublevel_nodes", e.sublevel_nodes},
                       {"psi_max", e.psi_max},
                       {"pointwise_worst", e.pointwise_worst},
                       {"pointwise_matches_psi", e.pointwise_matches_psi},
                       {"flagged_nodes", e.flagged_nodes},
                       {"radius_max", e.radius_max},
                       {"flagged_min_gap", e.flagged_min_gap},
                       {"integral_lhs", e.integral_lhs},
                       {"integral_rhs", e.integral_rhs},
                       {"integral_rhs_C1", e.integral_rhs_C1},
                       {"Iq", e.Iq},
                       {"pass", e.pass}});
  }
  return {{"slack", r.slack},
          {"entries", entries},
          {"recursion",
           {{"pairs", r.recursion.pairs},
            {"worst_ratio", r.recursion.worst_ratio},
            {"worst_As_ratio", r.recursion.worst_As_ratio},
            {"pass", r.recursion.pass}}},
          {"sup_neg_phi", r.sup_neg_phi},
          {"sup_within_literal", r.sup_within_literal},
          {"sup_within_corrected", r.sup_within_corrected},
          {"psi_pass", r.psi_pass},
          {"ball_pass", r.ball_pass},
          {"pointwise_pass", r.pointwise_pass},
          {"integral_pass", r.integral_pass},
          {"pass", r.pass}};
}

DeGiorgiResult de_giorgi(const LevelSetProfile& p, double C, double alpha) {
  require(C > 0.0 && alpha > 0.0, "C and alpha must be positive");
  const auto& s = p.s_grid;
  const auto& f = p.phi_of_s;
  require(!s.empty() && s.size() == f.size(), "empty or inconsistent profile");
  for (std::size_t i = 1; i < s.size(); ++i) {
    require(s[i] > s[i - 1], "s-grid must be increasing");
    require(f[i] <= f[i - 1] * (1.0 + 1e-12) + 1e-300, "profile must be non-increasing");
  }
  auto phi = [&](double x) {
    if (x <= s.front()) return f.front();
    if (x >= s.back()) return f.back();
    const auto it = std::upper_bound(s.begin(), s.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - s.begin());
    const double t = (x - s[j - 1]) / (s[j] - s[j - 1]);
    return (1.0 - t) * f[j - 1] + t * f[j];
  };

  DeGiorgiResult r;
  r.threshold = std::pow(2.0 * C, -1.0 / alpha);
  std::size_t start = s.size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (f[i] <= r.threshold) {
      start = i;
      break;
    }
  }
  if (start == s.size()) {
    throw DomainError("profile never drops below the De Giorgi threshold on its s-grid");
  }
  r.start = s[start];
  double x = r.start;
  for (;;) {
    const double v = phi(x);
    if (v <= 0.0) break;
    const double step = 2.0 * C * std::pow(v, alpha);
    if (r.steps >= 10000 || step <= 1e-15 * std::max(1.0, std::abs(x))) {
      r.stalled = true;
      break;
    }
    x += step;
    ++r.steps;
  }
  r.level = x;
  return r;
}

nlohmann::json to_json(const DeGiorgiResult& r) {
  return {{"start", r.start},
          {"level", r.level},
          {"threshold", r.threshold},
          {"steps", r.steps},
          {"stalled", r.stalled}};
}

LemmaReport lemma_checks(const TorusGrid& grid, const HermitianMetricField& omega,
                         const std::vector<ScalarField>& samples,
                         const HermitianMetricField& chi_prime, const std::vector<ScalarField>& vs,
                         double q, double C0) {
  require(q > grid.n(), "q must exceed n");
  require(C0 > 0.0, "C0 must be positive");
  const ScalarField w = volume_weights(grid, omega);
  const double V = w.sum();
  LemmaReport r;
  r.q = q;
  r.C0 = C0;
  r.L1_bound = 2.0 * grid.n() * C0;
  for (const ScalarField& psi : samples) {
    if (psi.size() != grid.nodes()) throw DomainError("sample does not match the grid");
    if (std::abs(psi.maxCoeff()) > 1e-12) throw PreconditionError("sample is not normalized by sup = 0");
    const HermitianMetricField sum = omega + ddbar(grid, psi);
    if (min_relative_eig(omega, sum) < -1e-12) {
      throw PreconditionError("sample is not omega-plurisubharmonic");
    }
    double l1 = 0.0, lq = 0.0;
    for (std::int64_t i = 0; i < grid.nodes(); ++i) {
      l1 += -psi[i] * w[i];
      lq += std::pow(-psi[i], q) * w[i];
    }
    l1 /= V;
    lq /= V;
    r.L1_max = std::max(r.L1_max, l1);
    r.Lq_max = std::max(r.Lq_max, lq);
    if (l1 > r.L1_bound * (1.0 + 1e-12)) ++r.violations;
    ++r.samples;
  }

  const HermitianMetricField inv = inverse(omega);
  ScalarField tr(grid.nodes());
  for (std::int64_t i = 0; i < grid.nodes(); ++i) {
    tr[i] = (inv.at(i) * chi_prime.at(i)).trace().real();
  }
  const double kappa2 = tr.maxCoeff();
  r.v_bound = 2.0 * kappa2 * C0;
  for (const ScalarField& v : vs) {
    if (v.size() != grid.nodes()) throw DomainError("field does not match the grid");
    if (std::abs(v.maxCoeff()) > 1e-12) throw PreconditionError("field is not normalized by sup = 0");
    const ScalarField lap = laplacian(grid, omega, v);
    if ((tr + lap).minCoeff() <= 0.0) {
      throw PreconditionError("tr chi' + Laplacian v is not positive");
    }
    const double l1 = -v.dot(w) / V;
    r.v_max = std::max(r.v_max, l1);
    if (l1 > r.v_bound * (1.0 + 1e-12)) ++r.violations;
    ++r.v_samples;
  }
  r.pass = r.violations == 0;
  return r;
}

nlohmann::json to_json(const LemmaReport& r) {
  return {{"samples", r.samples}, {"C0", r.C0},         {"L1_max", r.L1_max},
          {"L1_bound", r.L1_bound}, {"C1_measured", r.Lq_max}, {"q", r.q},
          {"v_samples", r.v_samples}, {"v_max", r.v_max}, {"v_bound", r.v_bound},
          {"violations", r.violations}, {"pass", r.pass}};
}

EigenChainReport verify_eigen_chain(const ConeOperator& op, const TorusGrid& grid,
                                             const HermitianMetricField& omega,
                                             const HermitianMetricField& chi_prime,
                                             const ScalarField& F, const ScalarField& phi_prime,
                                             double delta, double tol) {
  const SubsolutionCertificate cert = check_delta_tilde(op, grid, omega, chi_prime, F, delta);
  if (!cert.pass) {
    throw PreconditionError("chi' is not a delta-subsolution (worst ratio " +
                            std::to_string(cert.worst_value) + ")");
  }
  const HermitianMetricField dphi = ddbar(grid, phi_prime);
  const Eigen::MatrixXd lam = relative_eigs_field(omega, chi_prime + dphi);
  const Eigen::MatrixXd mu = relative_eigs_field(omega, chi_prime);
  const Eigen::MatrixXd flag = relative_eigs_field(omega, dphi + (0.5 * delta) * chi_prime);
  const double upper = (2.0 - delta) * (1.0 - delta) / delta;
  EigenChainReport r;
  r.tol = tol;
  r.lower_slack = r.upper_slack = kInf;
  for (std::int64_t i = 0; i < grid.nodes(); ++i) {
    if (!(flag(i, 0) > 0.0)) continue;
    ++r.flagged_nodes;
    for (int k = 0; k < grid.n(); ++k) {
      const double lo = lam(i, k) - (1.0 - 0.5 * delta) * mu(i, k);
      const double hi = upper * mu(i, k) - lam(i, k);
      if (std::min(lo, hi) < std::min(r.lower_slack, r.upper_slack)) r.worst_node = i;
      r.lower_slack = std::min(r.lower_slack, lo);
      r.upper_slack = std::min(r.upper_slack, hi);
    }
  }
  r.pass = r.lower_slack >= -tol && r.upper_slack >= -tol;
  return r;
}

nlohmann::json to_json(const EigenChainReport& r) {
  return {{"flagged_nodes", r.flagged_nodes}, {"lower_slack", r.lower_slack},
          {"upper_slack", r.upper_slack},     {"worst_node", r.worst_node},
          {"tol", r.tol},                     {"pass", r.pass}};
}

}  // namespace linf
