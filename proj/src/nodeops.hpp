#pragma once

// Fixed-size per-node kernels. Node matrices are tiny (n <= 4), so dispatching
// once per field onto Eigen fixed-size types avoids heap traffic in the loops.

#include <cmath>
#include <complex>
#include <type_traits>

#include <Eigen/Dense>

namespace linf::detail {

template <int D>
using CMat = Eigen::Matrix<std::complex<double>, D, D>;
template <int D>
using RVec = Eigen::Matrix<double, D, 1>;

template <class Fn>
decltype(auto) dispatch_dim(int n, Fn&& fn) {
  switch (n) {
    case 1: return fn(std::integral_constant<int, 1>{});
    case 2: return fn(std::integral_constant<int, 2>{});
    case 3: return fn(std::integral_constant<int, 3>{});
    case 4: return fn(std::integral_constant<int, 4>{});
    default: return fn(std::integral_constant<int, Eigen::Dynamic>{});
  }
}

template <int D>
CMat<D> load(const std::complex<double>* p, int n) {
  return Eigen::Map<const CMat<D>>(p, n, n);
}

template <int D>
void store(const CMat<D>& m, std::complex<double>* p) {
  Eigen::Map<CMat<D>>(p, m.rows(), m.cols()) = m;
}

/// Ascending eigenvalues of a Hermitian 1x1 or 2x2 matrix in closed form.
/// The 2x2 radius is a sum of squares, so close pairs lose no accuracy.
template <int D>
RVec<D> eig_small(const CMat<D>& m) {
  RVec<D> lam;
  if constexpr (D == 1) {
    lam(0) = m(0, 0).real();
  } else {
    const double a = m(0, 0).real(), d = m(1, 1).real();
    const double mid = 0.5 * (a + d);
    const double r = std::hypot(0.5 * (a - d), std::abs(m(1, 0)));
    lam(0) = mid - r;
    lam(1) = mid + r;
  }
  return lam;
}

/// Relative eigen-decomposition of a against the positive definite g via the
/// Cholesky factor g = L L^*: L^{-1} a L^{-*} = U diag(lam) U^*. Returns false
/// if g is not positive definite.
template <int D>
bool relative_eig(const CMat<D>& g, const CMat<D>& a, RVec<D>& lam, CMat<D>* U = nullptr,
                  CMat<D>* Linv = nullptr) {
  if constexpr (D == 2) {
    if (!U && !Linv) {
      // Explicit Cholesky g = L L^* and m = L^{-1} a L^{-*}.
      const double g00 = g(0, 0).real();
      if (!(g00 > 0.0)) return false;
      const double l11 = std::sqrt(g00);
      const std::complex<double> l21 = g(1, 0) / l11;
      const double d = g(1, 1).real() - std::norm(l21);
      if (!(d > 0.0)) return false;
      const double l22 = std::sqrt(d);
      const double p = 1.0 / l11, y = 1.0 / l22;
      const std::complex<double> x = -l21 * (p * y);
      CMat<D> m;
      m(0, 0) = p * p * a(0, 0).real();
      m(1, 0) = (x * a(0, 0).real() + y * a(1, 0)) * p;
      m(0, 1) = std::conj(m(1, 0));
      m(1, 1) = std::norm(x) * a(0, 0).real() + 2.0 * y * (x * a(0, 1)).real() + y * y * a(1, 1).real();
      lam = eig_small<D>(m);
      return true;
    }
  }
  Eigen::LLT<CMat<D>> llt(g);
  if (llt.info() != Eigen::Success) return false;
  const auto n = g.rows();
  CMat<D> li = CMat<D>::Identity(n, n);
  llt.matrixL().solveInPlace(li);
  CMat<D> m = li * a * li.adjoint();
  m = (0.5 * (m + m.adjoint())).eval();
  if constexpr (D == 1 || D == 2) {
    if (!U) {
      lam = eig_small<D>(m);
      if (Linv) *Linv = li;
      return true;
    }
  }
  Eigen::SelfAdjointEigenSolver<CMat<D>> es(
      m, U ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  lam = es.eigenvalues();
  if (U) *U = es.eigenvectors();
  if (Linv) *Linv = li;
  return true;
}

template <int D>
double min_eig(const CMat<D>& a) {
  if constexpr (D == 1 || D == 2) return eig_small<D>(a)(0);
  Eigen::SelfAdjointEigenSolver<CMat<D>> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace linf::detail
