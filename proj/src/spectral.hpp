#pragma once

// Constant-coefficient inverse of u -> Re tr(C ddbar u) by FFT, and the
// bordered (u, c) Krylov solve used by every Newton step and Green's function.

#include <functional>
#include <memory>

#include <Eigen/Dense>

#include "linf/torus.hpp"

namespace linf::detail {

class SpectralInverse {
 public:
  explicit SpectralInverse(const TorusGrid& grid);
  ~SpectralInverse();
  SpectralInverse(const SpectralInverse&) = delete;
  SpectralInverse& operator=(const SpectralInverse&) = delete;

  /// Installs the constant Hermitian coefficient; it must be positive definite.
  void set_coefficient(const HermMatrix& C);

  /// Mean-zero u with Lbar u = r - mean(r).
  void apply(const double* r, double* u) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct BorderedResult {
  Eigen::VectorXd u;
  double c = 0.0;
  int iterations = 0;
  double residual = 0.0;  // sup-norm of (L u - c - r), relative to sup|r|
  bool converged = false;
};

/// Solves L u - c = r, mean(u) = m for (u, c) with BiCGSTAB preconditioned by
/// the spectral inverse of the averaged coefficient.
BorderedResult solve_bordered(const TorusGrid& grid,
                              const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& L,
                              const SpectralInverse& precond, const Eigen::VectorXd& r, double m,
                              double rel_tol, int max_iter, int restart = 30);

}  // namespace linf::detail
