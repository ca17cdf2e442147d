#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "linf/error.hpp"
#include "linf/symfun.hpp"

using namespace linf;
using V = std::vector<double>;

TEST_SUITE("symfun") {

TEST_CASE("elementary symmetric polynomials") {
  CHECK(sigma(1, V{1, 2, 3}) == doctest::Approx(6.0));
  CHECK(sigma(2, V{1, 2, 3}) == doctest::Approx(11.0));
  CHECK(sigma(0, V{5, 5}) == 1.0);
  const V all = sigma_all(V{1, 2, 3});
  REQUIRE(all.size() == 4);
  CHECK(all[3] == doctest::Approx(6.0));
}

TEST_CASE("cone membership") {
  CHECK(cone_contains(ConeId{1}, V{-1, 3}));
  CHECK_FALSE(cone_contains(ConeId{2}, V{-1, 3}));
  CHECK(cone_contains(ConeId{3}, V{1, 1, 1}));
}

TEST_CASE("operator values and gradients") {
  const OpValue j = op_eval(ConeOperator::j_operator(2), V{1, 2});
  CHECK(j.value == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(j.grad[0] == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
  CHECK(j.grad[1] == doctest::Approx(1.0 / 9.0).epsilon(1e-14));
  CHECK(op_eval(ConeOperator::monge_ampere(3), V{1, 1, 1}).value == doctest::Approx(1.0));
  CHECK(op_eval(ConeOperator::hessian_quotient(3, 1), V{1, 1, 1}).value ==
        doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(op_eval(ConeOperator::monge_ampere(2), V{-1, 2}), ConeError);
}

TEST_CASE("inverse-eigenvalue transform") {
  const ConeOperator J = ConeOperator::j_operator(2);
  CHECK(tilde_eval(J, V{1, 0.5}).value == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(tilde_eval(ConeOperator::monge_ampere(3), V{1, 1, 1}).value == doctest::Approx(1.0));
  CHECK(1.0 / op_eval(J, V{1, 2}).value == doctest::Approx(tilde_eval(J, V{1, 0.5}).value));
}

TEST_CASE("boundary crossing along rays") {
  CHECK(*boundary_cross(ConeOperator::sigma_k(3, 1), 3.0, V{0, 0, 0}, V{1, 1, 1}) ==
        doctest::Approx(1.0).epsilon(1e-10));
  const ConeOperator ma = ConeOperator::monge_ampere(2);
  CHECK(*boundary_cross(ma, 1.0, V{1, 1}, V{1, 1}) == doctest::Approx(0.0));
  CHECK(*boundary_cross(ma, 1.0, V{1, 1}, V{1, 0}) == doctest::Approx(0.0));
  CHECK(*boundary_cross(ma, 1.0, V{0.5, 0.5}, V{1, 0}) == doctest::Approx(1.5).epsilon(1e-10));
  // J is bounded by its smallest entry along an axis ray: sup_t J(1+t, 1) = 1.
  CHECK_FALSE(boundary_cross(ConeOperator::j_operator(2), 1.5, V{1, 1}, V{1, 0}).has_value());
  CHECK_THROWS_AS(boundary_cross(ma, 1.0, V{2, 2}, V{1, 0}), LevelPassedError);
}

TEST_CASE("structure checks") {
  for (const ConeOperator& op : {ConeOperator::j_operator(2), ConeOperator::j_operator(3),
                                 ConeOperator::hessian_quotient(3, 1),
                                 ConeOperator::monge_ampere(2), ConeOperator::sigma_k(3, 2)}) {
    CAPTURE(op.name());
    const StructureReport r = check_structure(op, 200, 7);
    CHECK(r.homogeneity_ok());
    CHECK(r.gradient_ok());
    CHECK(r.concavity_ok());
    CHECK(r.euler_ok());
    CHECK(r.involution_max <= 1e-10);
  }
  CHECK(check_structure(ConeOperator::sigma_k(3, 1), 100, 3).homogeneity_max <= 16 * std::numeric_limits<double>::epsilon());
}

TEST_CASE("structure checks detect a degree-two operator") {
  OperatorFunction sq;
  sq.name = "sigma1^2";
  sq.n = 2;
  sq.domain = ConeId{1};
  sq.eval = [](std::span<const double> l) {
    const double s = l[0] + l[1];
    return OpValue{s * s, {2 * s, 2 * s}};
  };
  const StructureReport r = check_structure(sq, 50, 1);
  CHECK_FALSE(r.homogeneity_ok());
  CHECK(r.homogeneity_max > 1e-3);
}

}
