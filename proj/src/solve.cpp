#include "linf/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "linf/error.hpp"
#include "linf/parallel.hpp"
#include "nodeops.hpp"
#include "spectral.hpp"

namespace linf {

using detail::CMat;
using detail::dispatch_dim;
using detail::RVec;

double tau(int k, double x) {
  if (k < 1) throw DomainError("truncation index k must be positive");
  const double e2 = 1.0 / (static_cast<double>(k) * k);
  const double r = std::sqrt(x * x + e2);
  return x >= 0.0 ? 0.5 * (x + r) : 0.5 * e2 / (r - x);
}

nlohmann::json to_json(const SolveReport& r, bool include_solution) {
  nlohmann::json j{{"method", r.method},
                   {"residual_sup", r.residual_sup},
                   {"iterations", r.iterations},
                   {"krylov_iterations", r.krylov_iterations},
                   {"positivity_margin", r.positivity_margin},
                   {"compat_shift", r.compat_shift},
                   {"normalization_shift", r.normalization_shift},
                   {"homotopy_steps", r.homotopy_steps},
                   {"residual_history", r.residual_history}};
  if (include_solution) {
    j["solution"] = std::vector<double>(r.solution.data(), r.solution.data() + r.solution.size());
  }
  return j;
}

ScalarField effective_F(const ScalarField& F, const SolveReport& r) {
  return (F.array() + r.normalization_shift + r.compat_shift).matrix();
}

namespace {

/// Nonlinear map u -> G(u) together with its linearization coefficient.
/// Returns false when u is not admissible at some node.
using EvalFn = std::function<bool(const ScalarField& u, ScalarField& G, HermitianMetricField& coeff)>;

struct NewtonState {
  ScalarField u;
  double c = 0.0;
};

struct NewtonOutcome {
  bool ok = false;
  SolveFailure failure = SolveFailure::NonConvergence;
  std::string detail;
  double residual = 0.0;
};

double residual_sup(const ScalarField& G, const ScalarField& log_target, double c) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < G.size(); ++i) {
    r = std::max(r, std::abs(std::exp(G[i]) - std::exp(log_target[i] + c)));
  }
  return r;
}

NewtonOutcome newton(const TorusGrid& grid, const EvalFn& eval, const ScalarField& log_target,
                     NewtonState& st, double tol, const SolveOptions& opts, SolveReport& rep,
                     detail::SpectralInverse& precond) {
  NewtonOutcome out;
  ScalarField G;
  HermitianMetricField coeff;
  if (!eval(st.u, G, coeff)) {
    out.failure = SolveFailure::NoAdmissibleStart;
    out.detail = "initial state is not admissible";
    return out;
  }
  ScalarField R = G - log_target;
  R.array() -= st.c;
  double rn = R.cwiseAbs().maxCoeff();

  for (int it = 0;; ++it) {
    out.residual = residual_sup(G, log_target, st.c);
    rep.residual_history.push_back(out.residual);
    if (out.residual <= tol) {
      out.ok = true;
      return out;
    }
    if (it >= opts.max_iter) {
      out.detail = "iteration cap reached with residual " + std::to_string(out.residual);
      return out;
    }
    ++rep.iterations;

    precond.set_coefficient(coeff.mean());
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> L =
        [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = trace_ddbar(grid, coeff, x); };
    const double eta = std::clamp(0.1 * rn, 1e-11, 1e-2);
    const ScalarField neg = -R;
    const detail::BorderedResult br =
        detail::solve_bordered(grid, L, precond, neg, 0.0, eta, opts.krylov_max_iter);
    rep.krylov_iterations += br.iterations;
    if (!br.u.allFinite() || br.residual > 0.5) {
      out.failure = SolveFailure::LinearSolve;
      out.detail = "Krylov solve stalled at relative residual " + std::to_string(br.residual);
      return out;
    }

    bool accepted = false;
    bool any_admissible = false;
    ScalarField Gt;
    HermitianMetricField coeff_t;
    for (double alpha = 1.0; alpha > 1e-10; alpha *= 0.5) {
      NewtonState trial{st.u + alpha * br.u, st.c + alpha * br.c};
      if (!eval(trial.u, Gt, coeff_t)) continue;
      any_admissible = true;
      ScalarField Rt = Gt - log_target;
      Rt.array() -= trial.c;
      const double rt = Rt.cwiseAbs().maxCoeff();
      if (rt <= (1.0 - 1e-4 * alpha) * rn) {
        st = std::move(trial);
        G = std::move(Gt);
        coeff = std::move(coeff_t);
        R = std::move(Rt);
        rn = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.failure = any_admissible ? SolveFailure::NonConvergence : SolveFailure::PositivityLoss;
      out.detail = any_admissible ? "line search could not reduce the residual"
                                  : "every damped step left the admissible set";
      return out;
    }
  }
}

/// Plain Newton, then continuation from target0 (solved by u = 0, c = 0) to
/// target when that fails.
NewtonState drive(const TorusGrid& grid, const EvalFn& eval, const ScalarField& target,
                  const ScalarField& target0, double tol, const SolveOptions& opts,
                  SolveReport& rep) {
  detail::SpectralInverse precond(grid);
  NewtonState st{ScalarField::Zero(grid.nodes()), 0.0};
  NewtonOutcome res = newton(grid, eval, target, st, tol, opts, rep, precond);
  if (res.ok) return st;
  if (!opts.homotopy || res.failure == SolveFailure::NoAdmissibleStart) {
    throw SolveError(res.failure, res.detail);
  }

  st = NewtonState{ScalarField::Zero(grid.nodes()), 0.0};
  double t = 0.0, dt = 0.25;
  while (t < 1.0) {
    const double tn = std::min(1.0, t + dt);
    const ScalarField tgt = (1.0 - tn) * target0 + tn * target;
    NewtonState trial = st;
    const double step_tol = tn < 1.0 ? std::max(tol, 1e-8) : tol;
    res = newton(grid, eval, tgt, trial, step_tol, opts, rep, precond);
    ++rep.homotopy_steps;
    if (res.ok) {
      st = std::move(trial);
      t = tn;
      dt = std::min(2.0 * dt, 0.5);
    } else {
      dt *= 0.5;
      if (dt < 1.0 / 4096) {
        throw SolveError(res.failure, "continuation stalled at t = " + std::to_string(t) + ": " +
                                          res.detail);
      }
    }
  }
  return st;
}

void check_grid(const TorusGrid& grid, const HermitianMetricField& f, const char* name) {
  if (f.n() != grid.n() || f.nodes() != grid.nodes()) {
    throw DomainError(std::string(name) + " does not match the grid");
  }
}

}  // namespace

SolveReport solve_ma_torus(const TorusGrid& grid, const HermitianMetricField& omega,
                           const ScalarField& rhs, double tol, const SolveOptions& opts) {
  check_grid(grid, omega, "omega");
  if (rhs.size() != grid.nodes()) throw DomainError("rhs does not match the grid");
  if (!(rhs.minCoeff() > 0.0)) {
    throw SolveError(SolveFailure::IncompatibleData, "rhs must be positive at every node");
  }
  const ScalarField w = volume_weights(grid, omega);
  const double V = w.sum();
  const double mass = rhs.dot(w);
  if (std::abs(mass - V) > std::max(tol, opts.compat_tol) * V) {
    throw SolveError(SolveFailure::IncompatibleData,
                     "sum rhs w = " + std::to_string(mass) + " but V = " + std::to_string(V));
  }
  const int n = grid.n();
  ScalarField logdet_g(grid.nodes());
  for (std::int64_t i = 0; i < grid.nodes(); ++i) {
    logdet_g[i] = std::log(w[i] / grid.cell_volume());
  }

  const EvalFn eval = [&](const ScalarField& u, ScalarField& G, HermitianMetricField& coeff) {
    HermitianMetricField M = ddbar(grid, u);
    M += omega;
    G.resize(grid.nodes());
    coeff = HermitianMetricField(n, grid.nodes());
    bool ok = true;
    dispatch_dim(n, [&](auto dim) {
      constexpr int D = decltype(dim)::value;
      for (std::int64_t i = 0; i < grid.nodes() && ok; ++i) {
        const CMat<D> m = detail::load<D>(M.node(i), n);
        Eigen::LLT<CMat<D>> llt(m);
        if (llt.info() != Eigen::Success) {
          ok = false;
          break;
        }
        double ld = 0.0;
        for (int k = 0; k < n; ++k) ld += std::log(std::norm(llt.matrixLLT()(k, k)));
        G[i] = ld - logdet_g[i];
        CMat<D> inv = llt.solve(CMat<D>::Identity(n, n));
        detail::store<D>((0.5 * (inv + inv.adjoint())).eval(), coeff.node(i));
      }
    });
    return ok && G.allFinite();
  };

  SolveReport rep;
  rep.method = "damped Newton on log det, spectral-preconditioned BiCGSTAB";
  const ScalarField target = rhs.array().log().matrix();
  NewtonState st = drive(grid, eval, target, ScalarField::Zero(grid.nodes()), tol, opts, rep);

  rep.compat_shift = st.c;
  rep.solution = st.u;
  rep.solution.array() -= rep.solution.maxCoeff();
  HermitianMetricField M = ddbar(grid, rep.solution);
  M += omega;
  rep.positivity_margin = min_relative_eig(omega, M);
  rep.residual_sup = rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
  return rep;
}

namespace {

double cone_margin(const ConeOperator& op, const double* lam, int n) {
  if (op.domain().k == n) return *std::min_element(lam, lam + n);
  const auto e = sigma_all(std::span<const double>(lam, static_cast<std::size_t>(n)));
  double m = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= op.domain().k; ++j) {
    m = std::min(m, std::copysign(std::pow(std::abs(e[static_cast<std::size_t>(j)]), 1.0 / j),
                                  e[static_cast<std::size_t>(j)]));
  }
  return m;
}

}  // namespace

SolveReport solve_f_torus(const ConeOperator& op, const TorusGrid& grid,
                          const HermitianMetricField& omega, const HermitianMetricField& chi,
                          const ScalarField& F, double tol, const SolveOptions& opts) {
  check_grid(grid, omega, "omega");
  check_grid(grid, chi, "chi");
  if (op.dim() != grid.n()) throw DomainError("operator dimension differs from the grid");
  if (F.size() != grid.nodes()) throw DomainError("F does not match the grid");
  const int n = grid.n();
  const ScalarField w = volume_weights(grid, omega);
  const double V = w.sum();

  SolveReport rep;
  rep.method = "damped Newton on log f with cone line search, spectral-preconditioned BiCGSTAB";
  // sum e^{nF} w = V after a constant shift of F
  rep.normalization_shift = -std::log((n * F.array()).exp().matrix().dot(w) / V) / n;
  const ScalarField target = (F.array() + rep.normalization_shift).matrix();

  // Cholesky inverses of omega, fixed for the whole solve.
  HermitianMetricField Linv(n, grid.nodes());
  dispatch_dim(n, [&](auto dim) {
    constexpr int D = decltype(dim)::value;
    for (std::int64_t i = 0; i < grid.nodes(); ++i) {
      Eigen::LLT<CMat<D>> llt(detail::load<D>(omega.node(i), n));
      if (llt.info() != Eigen::Success) throw DomainError("omega is not positive definite");
      CMat<D> li = CMat<D>::Identity(n, n);
      llt.matrixL().solveInPlace(li);
      detail::store<D>(li, Linv.node(i));
    }
  });

  const EvalFn eval = [&](const ScalarField& u, ScalarField& G, HermitianMetricField& coeff) {
    HermitianMetricField A = ddbar(grid, u);
    A += chi;
    G.resize(grid.nodes());
    coeff = HermitianMetricField(n, grid.nodes());
    bool ok = true;
    dispatch_dim(n, [&](auto dim) {
      constexpr int D = decltype(dim)::value;
      EigenTuple lam(static_cast<std::size_t>(n));
      for (std::int64_t i = 0; i < grid.nodes() && ok; ++i) {
        const CMat<D> li = detail::load<D>(Linv.node(i), n);
        CMat<D> m = li * detail::load<D>(A.node(i), n) * li.adjoint();
        m = (0.5 * (m + m.adjoint())).eval();
        Eigen::SelfAdjointEigenSolver<CMat<D>> es(m);
        for (int k = 0; k < n; ++k) lam[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
        if (!cone_contains(op.domain(), lam)) {
          ok = false;
          break;
        }
        const OpValue fv = op_eval(op, lam);
        if (!(fv.value > 0.0)) {
          ok = false;
          break;
        }
        G[i] = std::log(fv.value);
        RVec<D> gr(n);
        for (int k = 0; k < n; ++k) gr(k) = fv.grad[static_cast<std::size_t>(k)] / fv.value;
        const CMat<D> B = li.adjoint() * es.eigenvectors();
        CMat<D> theta = B * gr.asDiagonal() * B.adjoint();
        detail::store<D>((0.5 * (theta + theta.adjoint())).eval(), coeff.node(i));
      }
    });
    return ok;
  };

  ScalarField G0;
  HermitianMetricField c0;
  if (!eval(ScalarField::Zero(grid.nodes()), G0, c0)) {
    throw SolveError(SolveFailure::NoAdmissibleStart,
                     "chi has eigenvalues outside the operator cone relative to omega");
  }
  NewtonState st = drive(grid, eval, target, G0, tol, opts, rep);

  rep.compat_shift = st.c;
  rep.solution = st.u;
  rep.solution.array() -= rep.solution.maxCoeff();
  HermitianMetricField A = ddbar(grid, rep.solution);
  A += chi;
  const Eigen::MatrixXd lam = relative_eigs_field(omega, A);
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < lam.rows(); ++i) {
    const Eigen::VectorXd row = lam.row(i).transpose();
    margin = std::min(margin, cone_margin(op, row.data(), n));
  }
  rep.positivity_margin = margin;
  if (!(margin > 0.0)) throw SolveError(SolveFailure::ConeExit, "solution left the cone");
  rep.residual_sup = rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
  return rep;
}

double aux_mass(const TorusGrid& grid, const HermitianMetricField& omega,
                const ScalarField& phi_prime, double s, int k) {
  const ScalarField w = volume_weights(grid, omega);
  double m = 0.0;
  for (std::int64_t i = 0; i < grid.nodes(); ++i) m += tau(k, -phi_prime[i] - s) * w[i];
  return m / w.sum();
}

AuxSolution solve_aux(const TorusGrid& grid, const HermitianMetricField& omega,
                      const ScalarField& phi_prime, double s, int k, double tol,
                      const SolveOptions& opts) {
  const ScalarField w = volume_weights(grid, omega);
  const double V = w.sum();
  AuxSolution out;
  out.rhs.resize(grid.nodes());
  for (std::int64_t i = 0; i < grid.nodes(); ++i) out.rhs[i] = tau(k, -phi_prime[i] - s);
  out.A_sk = out.rhs.dot(w) / V;
  if (out.A_sk < 1e-14) {
    throw SolveError(SolveFailure::EmptySublevel,
                     "A_{s,k} = " + std::to_string(out.A_sk) + " below floor at s = " +
                         std::to_string(s));
  }
  out.rhs /= out.A_sk;
  out.report = solve_ma_torus(grid, omega, out.rhs, tol, opts);
  return out;
}

DiscDomain make_disc(const TorusGrid& grid, std::int64_t center, double r0) {
  if (grid.n() != 1) throw DomainError("the Dirichlet disc problem is implemented for n = 1");
  const double h = grid.h();
  if (!(r0 < 0.5) || !(r0 >= 2.0 * h)) throw DomainError("disc does not fit the grid");
  if (center < 0 || center >= grid.nodes()) throw DomainError("disc center outside the grid");
  DiscDomain d;
  d.N = grid.N();
  d.r0 = r0;
  d.center = center;
  d.radius.resize(static_cast<std::size_t>(grid.nodes()));
  const int cx = grid.coord(center, 0), cy = grid.coord(center, 1);
  const int N = grid.N();
  for (std::int64_t i = 0; i < grid.nodes(); ++i) {
    int dx = ((grid.coord(i, 0) - cx) % N + N + N / 2) % N - N / 2;
    int dy = ((grid.coord(i, 1) - cy) % N + N + N / 2) % N - N / 2;
    const double r = std::hypot(dx * h, dy * h);
    d.radius[static_cast<std::size_t>(i)] = r;
    if (r < r0) d.interior.push_back(i);
  }
  return d;
}

struct DirichletDiscSolver::Impl {
  DiscDomain disc;
  TorusGrid grid;
  std::vector<int> local;  // grid node -> interior index or -1
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  Eigen::SparseMatrix<double> A;

  explicit Impl(const DiscDomain& d) : disc(d), grid(1, d.N) {
    local.assign(static_cast<std::size_t>(grid.nodes()), -1);
    for (std::size_t k = 0; k < d.interior.size(); ++k) {
      local[static_cast<std::size_t>(d.interior[k])] = static_cast<int>(k);
    }
    const double c = 1.0 / (4.0 * grid.h() * grid.h());
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t k = 0; k < d.interior.size(); ++k) {
      const std::int64_t i = d.interior[k];
      trip.emplace_back(static_cast<int>(k), static_cast<int>(k), 4.0 * c);
      for (int a = 0; a < 2; ++a) {
        for (int s : {-1, 1}) {
          const int j = local[static_cast<std::size_t>(grid.shift(i, a, s))];
          if (j >= 0) trip.emplace_back(static_cast<int>(k), j, -c);
        }
      }
    }
    const auto m = static_cast<Eigen::Index>(d.interior.size());
    A.resize(m, m);
    A.setFromTriplets(trip.begin(), trip.end());
    ldlt.compute(A);
    if (ldlt.info() != Eigen::Success) {
      throw SolveError(SolveFailure::LinearSolve, "Dirichlet factorization failed");
    }
  }
};

DirichletDiscSolver::DirichletDiscSolver(const DiscDomain& disc)
    : impl_(std::make_unique<Impl>(disc)) {}
DirichletDiscSolver::~DirichletDiscSolver() = default;
DirichletDiscSolver::DirichletDiscSolver(DirichletDiscSolver&&) noexcept = default;
DirichletDiscSolver& DirichletDiscSolver::operator=(DirichletDiscSolver&&) noexcept = default;
const DiscDomain& DirichletDiscSolver::disc() const { return impl_->disc; }

SolveReport DirichletDiscSolver::solve(const ScalarField& rhs) const {
  const auto& d = impl_->disc;
  if (rhs.size() != impl_->grid.nodes()) throw DomainError("rhs does not match the disc grid");
  const auto m = static_cast<Eigen::Index>(d.interior.size());
  Eigen::VectorXd b(m);
  for (Eigen::Index k = 0; k < m; ++k) b[k] = -rhs[d.interior[static_cast<std::size_t>(k)]];
  const Eigen::VectorXd x = impl_->ldlt.solve(b);
  if (impl_->ldlt.info() != Eigen::Success || !x.allFinite()) {
    throw SolveError(SolveFailure::LinearSolve, "Dirichlet solve failed");
  }
  SolveReport rep;
  rep.method = "sparse LDLT on the 5-point Dirichlet Laplacian";
  rep.solution = ScalarField::Zero(impl_->grid.nodes());
  for (Eigen::Index k = 0; k < m; ++k) rep.solution[d.interior[static_cast<std::size_t>(k)]] = x[k];
  const Eigen::VectorXd Ax = impl_->A * x;
  rep.residual_sup = m ? (Ax - b).cwiseAbs().maxCoeff() : 0.0;
  rep.positivity_margin = m ? (-Ax).minCoeff() : 0.0;
  rep.iterations = 1;
  rep.residual_history = {rep.residual_sup};
  return rep;
}

SolveReport solve_poisson_dirichlet_disc(const DiscDomain& disc, const ScalarField& rhs,
                                         double tol) {
  if (rhs.size() > 0 && rhs.minCoeff() < 0.0) throw DomainError("rhs must be non-negative");
  DirichletDiscSolver solver(disc);
  SolveReport rep = solver.solve(rhs);
  const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  if (rep.residual_sup > tol * scale) {
    throw SolveError(SolveFailure::LinearSolve,
                     "Dirichlet residual " + std::to_string(rep.residual_sup) + " above tolerance");
  }
  return rep;
}

}  // namespace linf
