#include <algorithm>
#include <cmath>

#include "linf/error.hpp"
#include "linf/solve.hpp"
#include "linf/torus.hpp"
#include "spectral.hpp"

namespace linf {

GreenResult green(const TorusGrid& grid, const HermitianMetricField& omega, std::int64_t x0,
                  const GreenOptions& opts) {
  if (omega.n() != grid.n() || omega.nodes() != grid.nodes()) {
    throw DomainError("omega does not match the grid");
  }
  if (x0 < 0 || x0 >= grid.nodes()) throw DomainError("pole outside the grid");
  const ScalarField w = volume_weights(grid, omega);
  const double V = w.sum();

  // Delta G = -(delta_{x0}/w - 1/V)
  ScalarField src = ScalarField::Constant(grid.nodes(), -1.0 / V);
  src[x0] += 1.0 / w[x0];
  const ScalarField r = -src;

  detail::SpectralInverse precond(grid);
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> L;
  HermitianMetricField ginv;
  if (omega.is_uniform()) {
    const HermMatrix C = omega.at(0).inverse();
    precond.set_coefficient(C);
    L = [&grid, C](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = trace_ddbar(grid, C, x); };
  } else {
    ginv = inverse(omega);
    precond.set_coefficient(ginv.mean());
    L = [&grid, &ginv](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
      y = trace_ddbar(grid, ginv, x);
    };
  }
  const detail::BorderedResult br =
      detail::solve_bordered(grid, L, precond, r, 0.0, opts.tol, opts.max_iter);
  if (!br.converged && br.residual > 1e3 * opts.tol) {
    throw SolveError(SolveFailure::LinearSolve,
                     "Green solve residual " + std::to_string(br.residual));
  }

  GreenResult out;
  out.x0 = x0;
  out.G = br.u;
  out.G.array() -= out.G.dot(w) / V;
  out.shift = br.c;
  Eigen::VectorXd lg;
  L(out.G, lg);
  out.residual = (-lg - src).cwiseAbs().maxCoeff() * w[x0];
  out.sup_neg = (-out.G).maxCoeff();
  out.l1 = out.G.cwiseAbs().dot(w);
  out.C0 = out.sup_neg * V + out.l1;
  return out;
}

namespace {

// n = 1: Delta_omega = g^{-1} d dbar, so G_y = G_flat(. - y) + H + c_y where
// d dbar G_flat = 1 - delta_0 / h^2 and d dbar H = g / V - 1.
double green_C0_n1(const TorusGrid& grid, const HermitianMetricField& omega,
                   const std::vector<std::int64_t>& poles) {
  const ScalarField w = volume_weights(grid, omega);
  const double V = w.sum();
  const std::int64_t nodes = grid.nodes();
  const double h2 = grid.h() * grid.h();
  detail::SpectralInverse inv(grid);
  inv.set_coefficient(HermMatrix::Identity(1, 1));
  ScalarField r = ScalarField::Ones(nodes);
  r[0] -= 1.0 / h2;
  ScalarField G0(nodes), H(nodes);
  inv.apply(r.data(), G0.data());
  for (std::int64_t i = 0; i < nodes; ++i) r[i] = w[i] / (h2 * V) - 1.0;
  inv.apply(r.data(), H.data());

  const int N = grid.N();
  double c0 = 0.0;
  ScalarField G(nodes);
  for (std::int64_t y : poles) {
    if (y < 0 || y >= nodes) throw DomainError("pole outside the grid");
    const int yx = grid.coord(y, 0), yy = grid.coord(y, 1);
    for (int a = 0; a < N; ++a) {
      const int sa = (a - yx + N) % N;
      for (int b = 0; b < N; ++b) {
        const std::int64_t i = static_cast<std::int64_t>(a) * N + b;
        G[i] = G0[static_cast<std::int64_t>(sa) * N + (b - yy + N) % N] + H[i];
      }
    }
    G.array() -= G.dot(w) / V;
    c0 = std::max(c0, (-G).maxCoeff() * V + G.cwiseAbs().dot(w));
  }
  return c0;
}

}  // namespace

double green_C0(const TorusGrid& grid, const HermitianMetricField& omega,
                const std::vector<std::int64_t>& poles, const GreenOptions& opts) {
  if (poles.empty()) throw DomainError("no poles given");
  if (omega.is_uniform()) return green(grid, omega, poles.front(), opts).C0;
  if (grid.n() == 1) return green_C0_n1(grid, omega, poles);
  double c0 = 0.0;
  for (std::int64_t p : poles) c0 = std::max(c0, green(grid, omega, p, opts).C0);
  return c0;
}

}  // namespace linf
