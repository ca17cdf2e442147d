#include <doctest.h>

#include <cmath>
#include <numbers>

#include "linf/error.hpp"
#include "linf/torus.hpp"

using namespace linf;
using std::numbers::pi;

namespace {
HermitianMetricField flat(const TorusGrid& g, double c = 1.0) {
  return HermitianMetricField::constant(g, c * HermMatrix::Identity(g.n(), g.n()));
}

double ddbar_error_n1(int N) {
  const TorusGrid g(1, N);
  const ScalarField phi = make_field(g, [](const std::vector<double>& x) { return std::cos(2 * pi * x[0]); });
  const HermitianMetricField H = ddbar(g, phi);
  double err = 0.0;
  for (std::int64_t i = 0; i < g.nodes(); ++i) {
    err = std::max(err, std::abs(H.at(i)(0, 0).real() + pi * pi * phi[i]));
  }
  return err;
}
}  // namespace

TEST_SUITE("torus") {

TEST_CASE("grid indexing") {
  const TorusGrid g(2, 8);
  CHECK(g.nodes() == 4096);
  const std::int64_t i = g.index({1, 2, 3, 4});
  CHECK(g.coords(i) == std::vector<int>{1, 2, 3, 4});
  CHECK(g.coord(g.shift(i, 0, -2), 0) == 7);
  CHECK(g.point(i)[3] == doctest::Approx(0.5));
}

TEST_CASE("ddbar of constants and cosines") {
  const TorusGrid g(2, 8);
  const HermitianMetricField H = ddbar(g, ScalarField::Constant(g.nodes(), 7.0));
  for (const auto& z : H.raw()) CHECK(std::abs(z) == 0.0);
  const double e32 = ddbar_error_n1(32), e64 = ddbar_error_n1(64);
  CHECK(e32 < 0.05);
  CHECK(e32 / e64 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("metric functionals") {
  const TorusGrid g(2, 8);
  const MetricFunctionals id = metric_functionals(g, flat(g), flat(g), 3.0);
  CHECK(id.V_omega == doctest::Approx(1.0));
  CHECK(id.N_p == doctest::Approx(0.0));
  CHECK(id.F_field.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(id.normalization == doctest::Approx(1.0));
  const MetricFunctionals sc = metric_functionals(g, flat(g, 2.5), flat(g), 3.0);
  CHECK(sc.F_field.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(sc.pairing == doctest::Approx(2.5));
  CHECK(kset_membership(id, 2.0, 1.0, ScalarField::Constant(1, 0.5)));
  CHECK_FALSE(kset_membership(metric_functionals(g, flat(g, 3.0), flat(g), 3.0), 2.0, 1.0,
                              ScalarField::Constant(1, 0.5)));
}

TEST_CASE("diagonal degeneration keeps the normalised density constant") {
  const TorusGrid g(2, 8);
  for (double t : {1.0, 0.5, 0.1}) {
    HermMatrix m = HermMatrix::Identity(2, 2);
    m(0, 0) = t;
    const MetricFunctionals mf =
        metric_functionals(g, HermitianMetricField::constant(g, m), flat(g), 3.0);
    CHECK(mf.gamma_min == doctest::Approx(1.0));
    CHECK(mf.pairing == doctest::Approx((t + 1.0) / 2.0));
  }
}

TEST_CASE("Green's function") {
  const TorusGrid g(1, 32);
  const HermitianMetricField om = flat(g);
  const std::int64_t x = g.index({3, 5}), y = g.index({20, 11});
  const GreenResult gx = green(g, om, x), gy = green(g, om, y);
  CHECK(std::abs(gx.G[y] - gy.G[x]) <= 1e-8);
  CHECK(gx.residual <= 1e-10);
  CHECK(gx.C0 > 0.0);

  // Representation formula on a smooth field, error O(h^2).
  auto rep_err = [](int N) {
    const TorusGrid gg(1, N);
    const HermitianMetricField o = flat(gg);
    const ScalarField phi = make_field(gg, [](const std::vector<double>& p) {
      return std::sin(2 * pi * p[0]) * std::cos(2 * pi * p[1]) + 0.3 * std::cos(4 * pi * p[1]);
    });
    const std::int64_t x0 = gg.index({N / 4, N / 8});
    const GreenResult gr = green(gg, o, x0);
    const ScalarField w = volume_weights(gg, o);
    const ScalarField lap = laplacian(gg, o, phi);
    const double mean = phi.dot(w) / w.sum();
    const double rep = mean + (gr.G.array() * (-lap.array()) * w.array()).sum();
    return std::abs(rep - phi[x0]);
  };
  CHECK(rep_err(32) <= 1e-10);
}

TEST_CASE("Green constant on a perturbed metric scans every pole") {
  const TorusGrid g(1, 16);
  const ScalarField f = random_trig_field(g, 3, 4, 2);
  HermitianMetricField om(1, g.nodes());
  for (std::int64_t i = 0; i < g.nodes(); ++i) {
    om.set(i, (1.0 + 0.3 * f[i] / f.cwiseAbs().maxCoeff()) * HermMatrix::Identity(1, 1));
  }
  std::vector<std::int64_t> poles;
  double direct = 0.0;
  for (std::int64_t i = 0; i < g.nodes(); i += 7) {
    poles.push_back(i);
    direct = std::max(direct, green(g, om, i).C0);
  }
  CHECK(green_C0(g, om, poles) == doctest::Approx(direct).epsilon(1e-8));
}

TEST_CASE("level profile") {
  const TorusGrid g(1, 8);
  ScalarField phi(g.nodes());
  for (std::int64_t i = 0; i < g.nodes(); ++i) phi[i] = i % 2 ? -2.0 : 0.0;
  const LevelSetProfile p = level_profile(g, phi, flat(g), {0.0, 1.0, 2.0, 3.0});
  CHECK(p.phi_of_s[1] == doctest::Approx(0.5));
  CHECK(p.A_of_s[1] == doctest::Approx(0.5));
  CHECK(p.phi_of_s[2] == 0.0);
  CHECK(p.A_of_s[3] == 0.0);

  const TorusGrid g2(2, 8);
  const ScalarField r = random_trig_field(g2, 9, 6, 2);
  const ScalarField phi2 = (r.array() - r.maxCoeff()).matrix();
  std::vector<double> s;
  for (int i = 0; i < 40; ++i) s.push_back(0.05 * i);
  const LevelSetProfile q = level_profile(g2, phi2, flat(g2), s);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(q.phi_of_s[i] <= q.phi_of_s[i - 1]);
}

TEST_CASE("psh samples") {
  const TorusGrid g(2, 8);
  HermMatrix m = HermMatrix::Identity(2, 2);
  m(0, 0) = 0.3;
  m(0, 1) = std::complex<double>(0.1, 0.05);
  m(1, 0) = std::conj(m(0, 1));
  const HermitianMetricField om = HermitianMetricField::constant(g, m);
  const PshSample a = sample_psh_detailed(g, om, 17);
  CHECK(a.margin > 0.0);
  CHECK(a.amplitude <= a.amplitude_max);
  CHECK(a.psi.maxCoeff() == doctest::Approx(0.0));
  CHECK(min_relative_eig(om, om + ddbar(g, a.psi)) > 0.0);
  CHECK(sample_psh(g, om, 17) == a.psi);
  CHECK(min_relative_eig(om, om + ddbar(g, ScalarField::Zero(g.nodes()))) == doctest::Approx(1.0));
}

TEST_CASE("random trig field is deterministic with zero mean") {
  const TorusGrid g(2, 8);
  const ScalarField a = random_trig_field(g, 4, 6, 2), b = random_trig_field(g, 4, 6, 2);
  CHECK(a == b);
  CHECK(std::abs(a.mean()) <= 1e-12);
  CHECK(a != random_trig_field(g, 5, 6, 2));
}

}
