#include "linf/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linf/error.hpp"

namespace linf {

HermitianBudget hermitian_constants(const HermitianParams& in) {
  if (in.n < 1) throw DomainError("n must be positive");
  HermitianBudget b;
  b.n = in.n;
  const double n = in.n;
  b.q = in.q > 0.0 ? in.q : n + 2.0;
  if (!(b.q > n)) throw DomainError("q must exceed n");
  if (!(in.delta > 0.0) || !(in.R > 0.0) || !(in.kappa1 > 0.0) || !(in.kappa2 > 0.0) ||
      !(in.r0 > 0.0)) {
    throw DomainError("delta, R, kappa1, kappa2 and r0 must be positive");
  }
  b.delta = in.delta;
  b.R = in.R;
  b.kappa1 = in.kappa1;
  b.kappa2 = in.kappa2;
  b.r0 = in.r0;
  b.s0 = b.delta * b.kappa1 * b.r0 * b.r0 / 10.0;
  b.beta3 = std::pow((n + 1.0) / n, n / (n + 1.0)) *
            std::pow(b.R + b.delta + b.kappa1, n / (n + 1.0));
  b.alpha = 1.0 / n - 1.0 / b.q;
  return b;
}

nlohmann::json to_json(const HermitianBudget& b) {
  return {{"n", b.n},
          {"q", b.q},
          {"delta", b.delta},
          {"R", b.R},
          {"kappa1", b.kappa1},
          {"kappa2", b.kappa2},
          {"r0", b.r0},
          {"s0", b.s0},
          {"beta3", b.beta3},
          {"alpha", b.alpha},
          {"C0_prime", b.C0_prime},
          {"C1_prime", b.C1_prime},
          {"c0", b.c0},
          {"c0_simulated", b.c0_simulated},
          {"C0_torus", b.C0_torus},
          {"L1_bound", b.L1_bound},
          {"ball_volume", b.ball_volume},
          {"final_bound", b.final_bound}};
}

double simulate_c0(double s0, double C, double alpha) {
  if (!(s0 > 0.0) || !(C > 0.0) || !(alpha > 0.0)) throw DomainError("bad recursion data");
  auto descent = [&](double phi) {
    double total = 0.0;
    for (int j = 0; j < 100000; ++j) {
      const double step = 2.0 * C * std::pow(phi, alpha);
      total += step;
      if (step <= 1e-18 * total) break;
      phi *= 0.5;
    }
    return total;
  };
  double lo = 1e-300, hi = 1.0;
  while (descent(hi) < s0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (descent(mid) < s0 ? lo : hi) = mid;
    if (hi / lo - 1.0 < 1e-14) break;
  }
  return std::sqrt(lo * hi);
}

HermitianReport hermitian_budget(const HermitianParams& params, const TorusGrid& grid,
                                 const HermitianMetricField& omega,
                                 const HermitianMetricField& chi_prime,
                                 const ScalarField& phi, const HermitianOptions& opts) {
  if (grid.n() != 1 || params.n != 1) {
    throw DomainError("the solved Hermitian pipeline is implemented for n = 1");
  }
  if (phi.size() != grid.nodes() || omega.nodes() != grid.nodes() ||
      chi_prime.nodes() != grid.nodes()) {
    throw DomainError("fields do not match the grid");
  }
  HermitianReport rep;
  HermitianBudget& b = rep.budget;
  b = hermitian_constants(params);
  const double n = 1.0;
  const std::int64_t nodes = grid.nodes();
  const double h2 = grid.h() * grid.h();
  const ScalarField w = volume_weights(grid, omega);
  const double V = w.sum();

  // chi' bounds relative to omega.
  const Eigen::MatrixXd mu = relative_eigs_field(omega, chi_prime);
  if (mu.col(0).minCoeff() < -n * b.kappa1 - 1e-12 || mu.col(0).maxCoeff() > b.kappa2 + 1e-12) {
    throw PreconditionError("chi' violates -n kappa1 omega <= chi' <= kappa2 omega");
  }

  phi.minCoeff(&rep.x0);
  rep.observed = -phi[rep.x0];
  rep.L1_measured = -phi.dot(w);
  rep.slack = opts.slack_factor * h2 * std::max(1.0, rep.observed);

  const DiscDomain disc = make_disc(grid, rep.x0, b.r0);
  std::vector<char> inside(static_cast<std::size_t>(nodes), 0);
  for (std::int64_t i : disc.interior) inside[static_cast<std::size_t>(i)] = 1;
  rep.metric_min = std::numeric_limits<double>::infinity();
  rep.metric_max = 0.0;
  for (std::int64_t i : disc.interior) {
    const double g = w[i] / h2;
    rep.metric_min = std::min(rep.metric_min, g);
    rep.metric_max = std::max(rep.metric_max, g);
  }
  if (rep.metric_min < 0.5 || rep.metric_max > 2.0) {
    throw PreconditionError("metric leaves [1/2, 2] on the disc");
  }

  auto u_at = [&](std::int64_t i, double s) {
    const double r = disc.radius[static_cast<std::size_t>(i)];
    return phi[i] - phi[rep.x0] + 0.25 * b.delta * r * r - s;
  };

  rep.boundary_min = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < nodes; ++i) {
    if (inside[static_cast<std::size_t>(i)]) continue;
    bool touches = false;
    for (int ax = 0; ax < 2 && !touches; ++ax) {
      for (int d : {-1, 1}) touches = touches || inside[static_cast<std::size_t>(grid.shift(i, ax, d))];
    }
    if (touches) rep.boundary_min = std::min(rep.boundary_min, u_at(i, b.s0));
  }

  const DirichletDiscSolver solver(disc);

  // Worst admissible Dirichlet solution: unit point masses (the q-th moment is
  // convex in the Monge-Ampere measure).
  {
    ScalarField rhs = ScalarField::Zero(nodes);
    for (std::int64_t y : disc.interior) {
      rhs[y] = 1.0 / h2;
      const ScalarField G = solver.solve(rhs).solution;
      rhs[y] = 0.0;
      double m = 0.0;
      for (std::int64_t i : disc.interior) m += std::pow(std::max(0.0, -G[i]), b.q) * w[i];
      b.C0_prime = std::max(b.C0_prime, m);
    }
  }
  const double ex = b.q * (n + 1.0) / n;
  b.C1_prime = std::pow(b.C0_prime * std::pow(b.beta3, ex), 1.0 / b.q);
  b.c0 = std::pow(b.s0 * (1.0 - std::pow(2.0, -b.alpha)) / (2.0 * b.C1_prime), 1.0 / b.alpha);
  b.c0_simulated = simulate_c0(b.s0, b.C1_prime, b.alpha);
  rep.c0_consistent = std::abs(b.c0_simulated - b.c0) <= 1e-9 * b.c0;

  std::vector<std::int64_t> poles(static_cast<std::size_t>(nodes));
  for (std::int64_t i = 0; i < nodes; ++i) poles[static_cast<std::size_t>(i)] = i;
  b.C0_torus = green_C0(grid, omega, poles);
  b.L1_bound = V * 2.0 * b.kappa2 * b.C0_torus;
  for (std::int64_t i : disc.interior) b.ball_volume += w[i];
  b.final_bound = (b.L1_bound + b.ball_volume * b.s0) / b.c0;

  rep.phi_pass = true;
  for (double frac : opts.s_fractions) {
    const double s = frac * b.s0;
    for (int k : opts.k_list) {
      HermitianEntry e;
      e.s = s;
      e.k = k;
      ScalarField rhs = ScalarField::Zero(nodes);
      for (std::int64_t i : disc.interior) {
        rhs[i] = tau(k, -u_at(i, s));
        e.A_sk += rhs[i] * w[i];
      }
      if (!(e.A_sk > 0.0)) throw SolveError(SolveFailure::EmptySublevel, "A_{s,k} vanishes");
      for (std::int64_t i : disc.interior) rhs[i] *= w[i] / (h2 * e.A_sk);
      const SolveReport sr = solver.solve(rhs);
      const ScalarField& psi = sr.solution;
      e.solve_residual = sr.residual_sup;
      e.eps = b.beta3 * std::pow(e.A_sk, 1.0 / (n + 1.0));
      e.phi_max = -std::numeric_limits<double>::infinity();
      double lhs = 0.0, lhs_slack = 0.0, Iq = 0.0;
      for (std::int64_t i : disc.interior) {
        const double mpsi = std::max(0.0, -psi[i]);
        Iq += std::pow(mpsi, b.q) * w[i];
        const double u = u_at(i, s);
        if (!(u < 0.0)) continue;
        ++e.level_nodes;
        e.phi_max = std::max(e.phi_max, -e.eps * std::pow(mpsi, n / (n + 1.0)) - u);
        lhs += std::pow(-u, ex) * w[i];
        lhs_slack += std::pow(std::max(0.0, -u - rep.slack), ex) * w[i];
      }
      const double coef = std::pow(b.beta3, ex) * std::pow(e.A_sk, b.q / n);
      e.integral_lhs = lhs;
      e.integral_rhs = coef * Iq;
      e.pass = e.phi_max <= rep.slack && lhs_slack <= e.integral_rhs &&
               e.integral_rhs <= coef * b.C0_prime * (1.0 + 1e-9);
      rep.phi_pass = rep.phi_pass && e.pass;
      rep.entries.push_back(e);
    }
  }

  // Level volumes on (0, s0].
  const int m = std::max(2, opts.profile_points);
  for (int j = 1; j <= m; ++j) {
    const double s = b.s0 * j / m;
    double vol = 0.0, A = 0.0;
    for (std::int64_t i : disc.interior) {
      const double u = u_at(i, s);
      if (u < 0.0) {
        vol += w[i];
        A += -u * w[i];
      }
    }
    rep.profile.s_grid.push_back(s);
    rep.profile.phi_of_s.push_back(vol);
    rep.profile.A_of_s.push_back(A);
  }
  const auto& sg = rep.profile.s_grid;
  const auto& ph = rep.profile.phi_of_s;
  for (std::size_t j = 0; j < sg.size(); ++j) {
    const double rhs = b.C1_prime * std::pow(ph[j], 1.0 + b.alpha);
    rep.As_worst = std::max(rep.As_worst, rep.profile.A_of_s[j] / rhs);
    for (std::size_t i = 0; i < j; ++i) {
      const double t = sg[j] - sg[i];
      rep.recursion_worst = std::max(rep.recursion_worst, t * ph[i] / rhs);
      ++rep.recursion_pairs;
    }
  }
  rep.phi_hat_s0 = ph.back();
  rep.recursion_pass = rep.recursion_worst <= 1.0 && rep.As_worst <= 1.0;
  rep.bound_pass = rep.boundary_min > 0.0 && rep.phi_hat_s0 >= b.c0 &&
                   rep.L1_measured <= b.L1_bound && b.final_bound >= rep.observed;
  rep.pass = rep.phi_pass && rep.recursion_pass && rep.bound_pass && rep.c0_consistent;
  return rep;
}

nlohmann::json to_json(const HermitianReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const HermitianEntry& e : r.entries) {
    entries.push_back({{"s", e.s},
                       {"k", e.k},
                       {"A_sk", e.A_sk},
                       {"eps", e.eps},
                       {"level_nodes", e.level_nodes},
                       {"phi_max", e.phi_max},
                       {"integral_lhs", e.integral_lhs},
                       {"integral_rhs", e.integral_rhs},
                       {"solve_residual", e.solve_residual},
                       {"pass", e.pass}});
  }
  return {{"budget", to_json(r.budget)},
          {"x0", r.x0},
          {"observed", r.observed},
          {"L1_measured", r.L1_measured},
          {"metric_min", r.metric_min},
          {"metric_max", r.metric_max},
          {"boundary_min", r.boundary_min},
          {"slack", r.slack},
          {"entries", entries},
          {"recursion_worst", r.recursion_worst},
          {"As_worst", r.As_worst},
          {"recursion_pairs", r.recursion_pairs},
          {"phi_hat_s0", r.phi_hat_s0},
          {"c0_consistent", r.c0_consistent},
          {"phi_pass", r.phi_pass},
          {"recursion_pass", r.recursion_pass},
          {"bound_pass", r.bound_pass},
          {"pass", r.pass}};
}

}  // namespace linf
