#pragma once

// Newton solvers on the torus (complex Monge-Ampere and the general
// f(lambda) = e^F equation), the truncated auxiliary equation, and the n = 1
// Dirichlet problem on a coordinate disc.

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "linf/symfun.hpp"
#include "linf/torus.hpp"

namespace linf {

struct SolveOptions {
  int max_iter = 200;
  int krylov_max_iter = 400;
  /// Allowed relative incompatibility |sum rhs w - V| / V of MA data.
  double compat_tol = 1e-8;
  /// Fall back to continuation in the data when plain damped Newton fails.
  bool homotopy = true;
};

struct SolveReport {
  ScalarField solution;
  double residual_sup = 0.0;
  int iterations = 0;
  int krylov_iterations = 0;
  double positivity_margin = 0.0;
  /// Constant c with equation solved as (...) = data * e^{c} (MA) or
  /// log f = F + normalization_shift + c (f-equation).
  double compat_shift = 0.0;
  double normalization_shift = 0.0;
  int homotopy_steps = 0;
  std::vector<double> residual_history;
  std::string method;
};

nlohmann::json to_json(const SolveReport& r, bool include_solution = false);

/// tau_k(x) = (x + sqrt(x^2 + k^-2)) / 2, evaluated without cancellation.
double tau(int k, double x);

/// det(g + ddbar psi) / det g = rhs * e^{c}, sup psi = 0.
SolveReport solve_ma_torus(const TorusGrid& grid, const HermitianMetricField& omega,
                           const ScalarField& rhs, double tol, const SolveOptions& opts = {});

/// f(lambda[omega^{-1}(chi + ddbar phi)]) = e^{F + shifts}, sup phi = 0.
SolveReport solve_f_torus(const ConeOperator& op, const TorusGrid& grid,
                          const HermitianMetricField& omega, const HermitianMetricField& chi,
                          const ScalarField& F, double tol, const SolveOptions& opts = {});

/// The effective right-hand side exponent F + normalization_shift + compat_shift.
ScalarField effective_F(const ScalarField& F, const SolveReport& r);

struct AuxSolution {
  SolveReport report;
  double A_sk = 0.0;
  ScalarField rhs;
};

/// A_{s,k} = (1/V) int tau_k(-phi' - s) omega^n.
double aux_mass(const TorusGrid& grid, const HermitianMetricField& omega,
                const ScalarField& phi_prime, double s, int k);

/// psi_{s,k} solving (omega + ddbar psi)^n = tau_k(-phi' - s) / A_{s,k} omega^n.
AuxSolution solve_aux(const TorusGrid& grid, const HermitianMetricField& omega,
                      const ScalarField& phi_prime, double s, int k, double tol,
                      const SolveOptions& opts = {});

/// Coordinate disc |z - z(center)| < r0 on an n = 1 grid.
struct DiscDomain {
  int N = 0;
  double r0 = 0.0;
  std::int64_t center = 0;
  std::vector<std::int64_t> interior;  // node ids, ascending
  std::vector<double> radius;          // |z| for every node of the grid
};

DiscDomain make_disc(const TorusGrid& grid, std::int64_t center, double r0);

/// Factorized Dirichlet problem psi_{z zbar} = rhs inside the disc, psi = 0
/// outside, reusable for many right-hand sides.
class DirichletDiscSolver {
 public:
  explicit DirichletDiscSolver(const DiscDomain& disc);
  ~DirichletDiscSolver();
  DirichletDiscSolver(DirichletDiscSolver&&) noexcept;
  DirichletDiscSolver& operator=(DirichletDiscSolver&&) noexcept;

  /// rhs is a full-grid field; only interior entries are used.
  SolveReport solve(const ScalarField& rhs) const;
  const DiscDomain& disc() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SolveReport solve_poisson_dirichlet_disc(const DiscDomain& disc, const ScalarField& rhs,
                                         double tol);

}  // namespace linf
