#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "linf/budget.hpp"
#include "linf/error.hpp"
#include "linf/hermitian.hpp"

using namespace linf;

namespace {
HermitianMetricField flat(const TorusGrid& g, double c = 1.0) {
  return HermitianMetricField::constant(g, c * HermMatrix::Identity(g.n(), g.n()));
}
}  // namespace

TEST_SUITE("budget") {

TEST_CASE("Kahler constants") {
  KahlerParams p;
  p.n = 2;
  p.R = 2.0;
  p.delta = 0.5;
  p.kappa1 = 0.0;
  p.kappa2 = 1.0;
  p.C0 = 1.0;
  const KahlerBudget b = kahler_constants(p);
  CHECK(b.beta1 == doctest::Approx(std::pow(3.75, 2.0 / 3.0)).epsilon(1e-14));
  CHECK(b.beta1 == doctest::Approx(2.4137).epsilon(1e-4));
  CHECK(b.beta2 == doctest::Approx(100.0 / 3.0).epsilon(1e-14));
  CHECK(b.C7 == doctest::Approx(2.0));
  CHECK(b.q == 4.0);
  CHECK(b.alpha == doctest::Approx(0.25));
  CHECK(b.S_infty > b.s0);
  p.q = 1.5;
  CHECK_THROWS_AS(kahler_constants(p), DomainError);
}

TEST_CASE("sup levels, both closed forms") {
  const SupLevels lv = sup_levels(2, 4.0, 1.0, 1.0);
  CHECK(lv.s0 == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-14));
  CHECK(lv.s0 == doctest::Approx(0.84090).epsilon(1e-5));
  CHECK(lv.S_infty == doctest::Approx(0.84090 + 16.0 / 15.0).epsilon(1e-5));
  CHECK(lv.S_infty == doctest::Approx(1.9076).epsilon(1e-4));
  CHECK(lv.s0_corrected == doctest::Approx(16.0));
  CHECK(lv.S_infty_corrected == doctest::Approx(16.0 + 1.0 / (1.0 - std::pow(2.0, -0.25))));
}

TEST_CASE("comparison function") {
  const PsiField v = comparison_psi(ScalarField::Constant(1, -3.0), ScalarField::Constant(1, -1.0),
                                    1.0, 1.0, 1.0, 2);
  CHECK(v.max_value == doctest::Approx(2.0 - std::pow(2.0, 2.0 / 3.0)).epsilon(1e-14));
  CHECK(v.max_value == doctest::Approx(0.4126).epsilon(1e-4));
  const PsiField e = comparison_psi(ScalarField::Zero(4), ScalarField::Zero(4), 0.5, 1.0, 1.0, 2);
  CHECK(e.max_value == -std::numeric_limits<double>::infinity());
  CHECK(e.argmax == -1);
}

TEST_CASE("auxiliary constants") {
  const ComparisonConstants c = comparison_constants(2, 0.5, 1.0, 1.0);
  CHECK(c.R == doctest::Approx(1.5));
  CHECK(c.eps == doctest::Approx(std::pow(2.25, 2.0 / 3.0)).epsilon(1e-14));
  CHECK(c.eps == doctest::Approx(1.7171).epsilon(1e-4));
  CHECK(c.Lambda == doctest::Approx(std::pow(4.0 * c.eps / 1.5, 3.0)).epsilon(1e-14));
  CHECK(c.Lambda == doctest::Approx(96.02).epsilon(1e-3));
  const ComparisonConstants z = comparison_constants(2, 0.5, 1.0, 0.0);
  CHECK(z.eps == 0.0);
  CHECK(z.Lambda == 0.0);
  CHECK(comparison_constants(2, 1.0 - 1e-9, 1.0, 1.0).R < 1e-8);
}

TEST_CASE("recursion scan on a synthetic profile") {
  LevelSetProfile p;
  for (int i = 0; i <= 100; ++i) {
    p.s_grid.push_back(0.05 * i);
    p.phi_of_s.push_back(std::exp(-0.05 * i));
  }
  const RecursionCheck ok = check_recursion(p, 10.0, 0.25);
  CHECK(ok.pass);
  CHECK(ok.pairs > 0);
  CHECK(ok.worst_ratio <= 1.0);
  CHECK_FALSE(check_recursion(p, 0.01, 0.25).pass);
}

TEST_CASE("De Giorgi iteration") {
  LevelSetProfile step;
  step.s_grid = {0.0, 0.5, 0.999999, 1.0, 2.0};
  step.phi_of_s = {1.0, 1.0, 1.0, 0.0, 0.0};
  const DeGiorgiResult r = de_giorgi(step, 0.5, 0.25);
  CHECK(r.start == 0.0);
  CHECK(r.level <= 1.0 + 2.0 * 0.5);
  CHECK_FALSE(r.stalled);

  LevelSetProfile e;
  for (int i = 0; i <= 50; ++i) {
    e.s_grid.push_back(0.1 * i);
    e.phi_of_s.push_back(0.5 * std::exp(-0.1 * i));
  }
  const DeGiorgiResult big = de_giorgi(e, 0.5, 1e6);
  CHECK(big.level == doctest::Approx(big.start).epsilon(1e-12));
}

TEST_CASE("integral lemmas on trivial data") {
  const TorusGrid g(2, 8);
  const ScalarField z = ScalarField::Zero(g.nodes());
  const LemmaReport r = lemma_checks(g, flat(g), {z}, flat(g, 2.0), {z}, 4.0, 0.5);
  CHECK(r.L1_max == 0.0);
  CHECK(r.Lq_max == 0.0);
  CHECK(r.v_max == 0.0);
  CHECK(r.violations == 0);
  CHECK(r.pass);
  CHECK(r.L1_bound == doctest::Approx(2.0));
  CHECK(r.v_bound == doctest::Approx(4.0));
}

TEST_CASE("chain on the trivial instance is vacuous") {
  const TorusGrid g(2, 8);
  const HermitianMetricField om = flat(g), chi = flat(g, 3.0);
  const ScalarField phi = ScalarField::Zero(g.nodes());
  ChainInputs in;
  in.grid = &g;
  in.omega = &om;
  in.chi_prime = &chi;
  in.phi_prime = &phi;
  in.profile = level_profile(g, phi, om, {0.0, 0.5, 1.0});
  KahlerParams kp;
  kp.R = 9.0;
  kp.kappa2 = 6.0;
  kp.C0 = 0.5;
  kp.C1 = 1.0;
  in.budget = kahler_constants(kp);
  in.aux.push_back({0.0, 10, 0.05, ScalarField::Zero(g.nodes())});
  const ChainReport r = verify_kahler_chain(in);
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].sublevel_nodes == 0);
  CHECK(r.sup_neg_phi == 0.0);
  CHECK(r.pass);
}

TEST_CASE("eigenvalue chain") {
  const TorusGrid g(2, 8);
  const ConeOperator J = ConeOperator::j_operator(2);
  const HermitianMetricField om = flat(g), chi = flat(g, 3.0);
  const ScalarField F = ScalarField::Constant(g.nodes(), std::log(1.5));
  const ScalarField zero = ScalarField::Zero(g.nodes());
  const EigenChainReport r = verify_eigen_chain(J, g, om, chi, F, zero, 0.4, 1e-12);
  CHECK(r.pass);
  CHECK(r.flagged_nodes == g.nodes());
  CHECK(r.lower_slack == doctest::Approx(0.2 * 3.0));
  CHECK(r.upper_slack == doctest::Approx((1.6 * 0.6 / 0.4 - 1.0) * 3.0));

  ScalarField bump = make_field(g, [](const std::vector<double>& x) {
    return 0.5 * std::cos(2 * std::numbers::pi * x[0]);
  });
  const EigenChainReport v = verify_eigen_chain(J, g, om, chi, F, bump, 0.4, 1e-12);
  CHECK_FALSE(v.pass);
  CHECK(std::min(v.lower_slack, v.upper_slack) < 0.0);
  CHECK_THROWS_AS(verify_eigen_chain(J, g, om, chi, F, zero, 0.5 + 1e-3, 1e-12),
                  PreconditionError);
}

TEST_CASE("Hermitian constants") {
  HermitianParams p;
  p.n = 1;
  p.delta = 0.5;
  p.kappa1 = 1.0;
  p.r0 = 1.0;
  CHECK(hermitian_constants(p).s0 == doctest::Approx(0.05));
  p.n = 2;
  p.R = 2.0;
  const HermitianBudget b = hermitian_constants(p);
  CHECK(b.beta3 == doctest::Approx(std::pow(5.25, 2.0 / 3.0)).epsilon(1e-14));
  CHECK(b.beta3 == doctest::Approx(3.02069).epsilon(1e-5));
}

TEST_CASE("simulated c0 matches the closed form") {
  for (double alpha : {0.25, 0.5, 2.0 / 3.0}) {
    const double s0 = 0.02, C = 3.0;
    const double closed = std::pow(s0 * (1.0 - std::pow(2.0, -alpha)) / (2.0 * C), 1.0 / alpha);
    CHECK(simulate_c0(s0, C, alpha) == doctest::Approx(closed).epsilon(1e-9));
  }
}

}
