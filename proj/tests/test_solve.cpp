#include <doctest.h>

#include <cmath>
#include <numbers>

#include "linf/error.hpp"
#include "linf/solve.hpp"
#include "linf/subsol.hpp"

using namespace linf;
using std::numbers::pi;

namespace {
HermitianMetricField flat(const TorusGrid& g, double c = 1.0) {
  return HermitianMetricField::constant(g, c * HermMatrix::Identity(g.n(), g.n()));
}

double sup_diff_mod_sup(const ScalarField& a, const ScalarField& b) {
  return ((a.array() - a.maxCoeff()) - (b.array() - b.maxCoeff())).abs().maxCoeff();
}
}  // namespace

TEST_SUITE("solve") {

TEST_CASE("tau") {
  CHECK(tau(10, 0.0) == doctest::Approx(0.05).epsilon(1e-14));
  CHECK(tau(10, -1.0) == doctest::Approx(0.5 * (-1.0 + std::sqrt(1.01))).epsilon(1e-12));
  CHECK(tau(1000000, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tau(1000000, -1.0) > 0.0);
}

TEST_CASE("Monge-Ampere: trivial data") {
  const TorusGrid g(2, 8);
  const SolveReport r = solve_ma_torus(g, flat(g), ScalarField::Ones(g.nodes()), 1e-12);
  CHECK(r.solution.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("Monge-Ampere: manufactured solutions") {
  {
    const TorusGrid g(1, 64);
    const ScalarField psi = make_field(g, [](const std::vector<double>& x) { return 0.05 * std::cos(2 * pi * x[0]); });
    const ScalarField rhs = (1.0 + trace_ddbar(g, HermMatrix::Identity(1, 1), psi).array()).matrix();
    const SolveReport r = solve_ma_torus(g, flat(g), rhs, 1e-12);
    CHECK(sup_diff_mod_sup(r.solution, psi) <= 1e-8);
  }
  {
    const TorusGrid g(2, 32);
    const ScalarField psi = make_field(g, [](const std::vector<double>& x) {
      return 0.03 * (std::cos(2 * pi * x[0]) + std::cos(2 * pi * x[3]));
    });
    const HermitianMetricField H = flat(g) + ddbar(g, psi);
    ScalarField rhs(g.nodes());
    for (std::int64_t i = 0; i < g.nodes(); ++i) rhs[i] = H.at(i).determinant().real();
    const SolveReport r = solve_ma_torus(g, flat(g), rhs, 1e-11);
    CHECK(sup_diff_mod_sup(r.solution, psi) <= 1e-6);
    // Forward re-check of the residual.
    const HermitianMetricField H2 = flat(g) + ddbar(g, r.solution);
    double res = 0.0;
    for (std::int64_t i = 0; i < g.nodes(); ++i) {
      res = std::max(res, std::abs(H2.at(i).determinant().real() - rhs[i] * std::exp(r.compat_shift)));
    }
    CHECK(res <= 1e-9);
  }
}

TEST_CASE("f-equation: constant solution") {
  const TorusGrid g(2, 8);
  const ConeOperator J = ConeOperator::j_operator(2);
  const double F = std::log(op_eval(J, std::vector<double>{1.0, 1.0}).value);
  const SolveReport r = solve_f_torus(J, g, flat(g), flat(g), ScalarField::Constant(g.nodes(), F), 1e-12);
  CHECK(r.solution.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("f-equation agrees with the Monge-Ampere solver") {
  const TorusGrid g(2, 16);
  const ScalarField F = 0.2 * random_trig_field(g, 3, 5, 2);
  const SolveReport a = solve_f_torus(ConeOperator::monge_ampere(2), g, flat(g), flat(g), F, 1e-12);
  // Same equation in determinant form; the compatibility constant is solved for.
  ScalarField rhs = (2.0 * F).array().exp().matrix();
  rhs /= rhs.mean();
  SolveOptions o;
  o.compat_tol = 1e-2;
  const SolveReport b = solve_ma_torus(g, flat(g), rhs, 1e-12, o);
  CHECK((a.solution - b.solution).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("J-equation solution is a subsolution with no slack") {
  const TorusGrid g(2, 16);
  const ConeOperator J = ConeOperator::j_operator(2);
  const HermitianMetricField om = flat(g), chi = 3.0 * flat(g);
  const ScalarField F = 0.1 * random_trig_field(g, 11, 6, 2);
  const SolveReport r = solve_f_torus(J, g, om, chi, F, 1e-11);
  CHECK(r.residual_sup <= 1e-11);
  CHECK(r.residual_history.size() == static_cast<std::size_t>(r.iterations + 1));
  const HermitianMetricField lam = chi + ddbar(g, r.solution);
  const SubsolutionCertificate c = check_delta_tilde(J, g, om, lam, effective_F(F, r), 0.0);
  CHECK(c.pass);
  CHECK(c.worst_value < 1.0);
}

TEST_CASE("auxiliary equation") {
  const TorusGrid g(1, 32);
  const HermitianMetricField om = flat(g);
  const AuxSolution z = solve_aux(g, om, ScalarField::Zero(g.nodes()), 0.1, 1000, 1e-12);
  CHECK(z.A_sk == doctest::Approx(0.5 * (std::sqrt(0.01 + 1e-6) - 0.1)).epsilon(1e-10));
  CHECK(z.report.solution.cwiseAbs().maxCoeff() <= 1e-10);

  const ScalarField phi = make_field(g, [](const std::vector<double>& x) {
    return 0.1 * (std::cos(2 * pi * x[0]) * std::cos(2 * pi * x[1]) - 1.0);
  });
  const double s = 0.05;
  const LevelSetProfile p = level_profile(g, phi, om, {s});
  CHECK(std::abs(aux_mass(g, om, phi, s, 1000000) - p.A_of_s[0]) <= 1e-6);
  const AuxSolution a = solve_aux(g, om, phi, s, 100, 1e-12);
  CHECK(a.A_sk == doctest::Approx(aux_mass(g, om, phi, s, 100)).epsilon(1e-14));
  const ScalarField w = volume_weights(g, om);
  CHECK(a.rhs.dot(w) == doctest::Approx(w.sum()).epsilon(1e-12));
  CHECK(a.report.residual_sup <= 1e-10);
}

TEST_CASE("Dirichlet problem on a disc") {
  const TorusGrid g(1, 32);
  const DiscDomain d = make_disc(g, g.index({16, 16}), 0.3);
  const DirichletDiscSolver solver(d);
  CHECK(solver.solve(ScalarField::Zero(g.nodes())).solution.cwiseAbs().maxCoeff() == 0.0);
  ScalarField delta = ScalarField::Zero(g.nodes());
  delta[d.center] = 1.0 / g.cell_volume();
  const ScalarField G = solver.solve(delta).solution;
  for (std::int64_t i : d.interior) CHECK(G[i] < 0.0);
  const ScalarField rhs = random_trig_field(g, 2, 4, 2).cwiseAbs();
  CHECK(solver.solve(rhs).solution.maxCoeff() <= 0.0);
}

}
