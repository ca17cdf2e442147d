#pragma once

// Budget for a fixed Hermitian metric: the local comparison on a coordinate
// disc around the minimum of phi', the level-volume recursion and the final
// bound. The solved pipeline runs for n = 1.

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "linf/budget.hpp"
#include "linf/solve.hpp"
#include "linf/torus.hpp"

namespace linf {

struct HermitianParams {
  int n = 1;
  double q = 0.0;  // 0 selects n + 2
  double delta = 0.5;
  double R = 1.0;
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  double r0 = 0.25;
};

struct HermitianBudget {
  int n = 0;
  double q = 0.0, delta = 0.0, R = 0.0, kappa1 = 0.0, kappa2 = 0.0, r0 = 0.0;
  double s0 = 0.0;
  double beta3 = 0.0;
  double alpha = 0.0;
  double C0_prime = 0.0, C1_prime = 0.0;
  double c0 = 0.0;            // closed form (s0 (1 - 2^{-alpha}) / (2 C1'))^{1/alpha}
  double c0_simulated = 0.0;  // simulate_c0
  double C0_torus = 0.0;      // Green constant of omega on the whole torus
  double L1_bound = 0.0;      // V 2 kappa2 C0_torus >= int (-phi') omega^n
  double ball_volume = 0.0;   // omega-volume of the disc
  double final_bound = 0.0;   // (L1_bound + ball_volume s0) / c0
};

/// s0, beta3 and alpha; valid for any n.
HermitianBudget hermitian_constants(const HermitianParams& params);
nlohmann::json to_json(const HermitianBudget& b);

/// Value of phi(s0) for which the extremal reverse recursion
/// s -> s - 2 C phi^alpha, phi -> phi / 2 uses up exactly (0, s0]; a smaller
/// phi(s0) would force phi to vanish at a positive level. Found by bisection
/// on the summed descent.
double simulate_c0(double s0, double C, double alpha);

struct HermitianEntry {
  double s = 0.0;
  int k = 0;
  double A_sk = 0.0, eps = 0.0;
  std::int64_t level_nodes = 0;
  double phi_max = 0.0;  // max Phi over U_s
  double integral_lhs = 0.0, integral_rhs = 0.0;
  double solve_residual = 0.0;
  bool pass = false;
};

struct HermitianOptions {
  std::vector<double> s_fractions{0.25, 0.5, 0.75, 1.0};
  std::vector<int> k_list{10, 100, 1000};
  int profile_points = 64;
  double slack_factor = 10.0;
};

struct HermitianReport {
  HermitianBudget budget;
  std::int64_t x0 = 0;
  double observed = 0.0;         // -min phi'
  double L1_measured = 0.0;      // int (-phi') omega^n
  double metric_min = 0.0, metric_max = 0.0;  // g on the disc
  double boundary_min = 0.0;     // min u_{s0} just outside the disc
  double slack = 0.0;
  std::vector<HermitianEntry> entries;
  LevelSetProfile profile;       // s, vol(U_s), int_{U_s} (-u_s)
  double recursion_worst = 0.0;  // max t phi(s - t) / (C1' phi(s)^{1+alpha})
  double As_worst = 0.0;         // max A_s / (C1' phi(s)^{1+alpha})
  std::int64_t recursion_pairs = 0;
  double phi_hat_s0 = 0.0;
  bool c0_consistent = false;    // closed form and simulation agree
  bool phi_pass = false;
  bool recursion_pass = false;
  bool bound_pass = false;
  bool pass = false;
};

/// phi' solves the equation for (omega, chi') with sup phi' = 0.
HermitianReport hermitian_budget(const HermitianParams& params, const TorusGrid& grid,
                                 const HermitianMetricField& omega,
                                 const HermitianMetricField& chi_prime,
                                 const ScalarField& phi_prime, const HermitianOptions& opts = {});
nlohmann::json to_json(const HermitianReport& r);

}  // namespace linf
