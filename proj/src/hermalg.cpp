#include "linf/hermalg.hpp"

#include <algorithm>
#include <cmath>

#include "linf/error.hpp"

namespace linf {

namespace {

constexpr double kHermTol = 1e-10;

void require_hermitian(const HermMatrix& a, const char* what) {
  if (a.rows() != a.cols()) throw DomainError(std::string(what) + " is not square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (hermiticity_residual(a) > kHermTol * scale) {
    throw DomainError(std::string(what) + " is not Hermitian");
  }
}

}  // namespace

double hermiticity_residual(const HermMatrix& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

EigenTuple sorted_eigs(const HermMatrix& a) {
  require_hermitian(a, "matrix");
  Eigen::SelfAdjointEigenSolver<HermMatrix> es(a, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  return EigenTuple(ev.data(), ev.data() + ev.size());
}

double min_eigenvalue(const HermMatrix& a) { return sorted_eigs(a).front(); }

bool is_positive_definite(const HermMatrix& a) { return min_eigenvalue(a) > 0.0; }

EigenTuple relative_eigs(const HermMatrix& omega, const HermMatrix& chi) {
  require_hermitian(omega, "omega");
  require_hermitian(chi, "chi");
  if (omega.rows() != chi.rows()) throw DomainError("omega and chi differ in size");
  Eigen::LLT<HermMatrix> llt(omega);
  if (llt.info() != Eigen::Success || !is_positive_definite(omega)) {
    throw DomainError("omega is not positive definite");
  }
  // L^{-1} chi L^{-*} is congruent to chi and similar to omega^{-1} chi.
  const HermMatrix linv_chi = llt.matrixL().solve(chi);
  HermMatrix m = llt.matrixL().solve(linv_chi.adjoint()).adjoint();
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<HermMatrix> es(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  return EigenTuple(ev.data(), ev.data() + ev.size());
}

bool min_max_monotone_check(const HermMatrix& a, const HermMatrix& b, double tol) {
  require_hermitian(a, "a");
  require_hermitian(b, "b");
  if (a.rows() != b.rows()) throw DomainError("a and b differ in size");
  const HermMatrix d = b - a;
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  if (min_eigenvalue(d) < -tol * scale) {
    throw PreconditionError("b - a is not positive semidefinite");
  }
  const EigenTuple la = sorted_eigs(a);
  const EigenTuple lb = sorted_eigs(b);
  for (std::size_t i = 0; i < la.size(); ++i) {
    if (lb[i] < la[i] - tol) return false;
  }
  return true;
}

HermMatrix random_hermitian(int n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  HermMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = {nd(rng), nd(rng)};
  }
  return 0.5 * (m + m.adjoint());
}

HermMatrix random_psd(int n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_int_distribution<int> rank_d(1, n);
  const int r = rank_d(rng);
  HermMatrix b(n, r);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < r; ++j) b(i, j) = {nd(rng), nd(rng)};
  }
  return scale * b * b.adjoint();
}

}  // namespace linf
