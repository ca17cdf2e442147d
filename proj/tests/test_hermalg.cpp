#include <doctest.h>

#include <random>

#include "linf/error.hpp"
#include "linf/hermalg.hpp"

using namespace linf;

namespace {
HermMatrix diag(double a, double b) {
  HermMatrix m = HermMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}
}  // namespace

TEST_SUITE("hermalg") {

TEST_CASE("relative eigenvalues") {
  const EigenTuple a = relative_eigs(diag(1, 1), diag(3, 1));
  CHECK(a[0] == doctest::Approx(1.0));
  CHECK(a[1] == doctest::Approx(3.0));
  const EigenTuple b = relative_eigs(diag(2, 2), diag(2, 4));
  CHECK(b[0] == doctest::Approx(1.0));
  CHECK(b[1] == doctest::Approx(2.0));
  CHECK_THROWS_AS(relative_eigs(diag(1, -1), diag(1, 1)), DomainError);
}

TEST_CASE("congruence invariance") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 4;
    const HermMatrix omega = random_psd(n, rng) + HermMatrix::Identity(n, n);
    const HermMatrix chi = random_hermitian(n, rng);
    HermMatrix S = random_hermitian(n, rng) + 3.0 * HermMatrix::Identity(n, n);
    S(0, n - 1) += std::complex<double>(0.3, 0.7);
    const EigenTuple e0 = relative_eigs(omega, chi);
    const EigenTuple e1 = relative_eigs(S.adjoint() * omega * S, S.adjoint() * chi * S);
    for (int i = 0; i < n; ++i) CHECK(std::abs(e0[i] - e1[i]) <= 1e-9);
  }
}

TEST_CASE("sorted-eigenvalue monotonicity") {
  CHECK(min_max_monotone_check(diag(1, 2), diag(2, 2)));
  CHECK(min_max_monotone_check(diag(1, 2), diag(1, 2)));
  CHECK_THROWS_AS(min_max_monotone_check(diag(2, 2), diag(1, 2)), PreconditionError);
}

}
