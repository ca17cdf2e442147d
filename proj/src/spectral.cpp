#include "spectral.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <fftw3.h>
#include <Eigen/IterativeLinearSolvers>

#include "linf/error.hpp"

namespace linf::detail {

struct SpectralInverse::Impl {
  const TorusGrid& grid;
  std::vector<int> dims;
  std::int64_t half = 0;  // complex output length
  double* real_buf = nullptr;
  fftw_complex* cplx_buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  std::vector<double> inv_symbol;

  explicit Impl(const TorusGrid& g) : grid(g) {
    const int axes = g.axes();
    dims.assign(static_cast<std::size_t>(axes), g.N());
    half = g.nodes() / g.N() * (g.N() / 2 + 1);
    real_buf = fftw_alloc_real(static_cast<std::size_t>(g.nodes()));
    cplx_buf = fftw_alloc_complex(static_cast<std::size_t>(half));
    fwd = fftw_plan_dft_r2c(axes, dims.data(), real_buf, cplx_buf, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r(axes, dims.data(), cplx_buf, real_buf, FFTW_ESTIMATE);
    if (!fwd || !bwd) throw Error("FFT planning failed");
  }
  ~Impl() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(real_buf);
    fftw_free(cplx_buf);
  }
};

SpectralInverse::SpectralInverse(const TorusGrid& grid) : impl_(std::make_unique<Impl>(grid)) {}
SpectralInverse::~SpectralInverse() = default;

void SpectralInverse::set_coefficient(const HermMatrix& C) {
  const TorusGrid& g = impl_->grid;
  const int n = g.n();
  const int N = g.N();
  const int axes = g.axes();
  const int last = N / 2 + 1;
  const double h2 = g.h() * g.h();
  auto& inv = impl_->inv_symbol;
  inv.assign(static_cast<std::size_t>(impl_->half), 0.0);

  std::vector<double> s(static_cast<std::size_t>(axes)), c2(static_cast<std::size_t>(axes));
  std::vector<int> k(static_cast<std::size_t>(axes), 0);
  for (std::int64_t idx = 0; idx < impl_->half; ++idx) {
    std::int64_t rem = idx;
    k[static_cast<std::size_t>(axes - 1)] = static_cast<int>(rem % last);
    rem /= last;
    for (int a = axes - 2; a >= 0; --a) {
      k[static_cast<std::size_t>(a)] = static_cast<int>(rem % N);
      rem /= N;
    }
    bool zero = true;
    for (int a = 0; a < axes; ++a) {
      const double th = 2.0 * std::numbers::pi * k[static_cast<std::size_t>(a)] / N;
      s[static_cast<std::size_t>(a)] = std::sin(th);
      const double sh = std::sin(0.5 * th);
      c2[static_cast<std::size_t>(a)] = sh * sh;
      zero = zero && k[static_cast<std::size_t>(a)] == 0;
    }
    if (zero) continue;
    double sigma = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto xi = static_cast<std::size_t>(2 * i), yi = xi + 1;
      sigma += C(i, i).real() * (-(c2[xi] + c2[yi]) / h2);
      for (int j = i + 1; j < n; ++j) {
        const auto xj = static_cast<std::size_t>(2 * j), yj = xj + 1;
        const double re = -0.25 * (s[xi] * s[xj] + s[yi] * s[yj]) / h2;
        const double im = -0.25 * (s[xi] * s[yj] - s[yi] * s[xj]) / h2;
        sigma += 2.0 * (C(i, j).real() * re + C(i, j).imag() * im);
      }
    }
    if (!(sigma < 0.0)) throw DomainError("preconditioner coefficient is not positive definite");
    inv[static_cast<std::size_t>(idx)] = 1.0 / (sigma * static_cast<double>(g.nodes()));
  }
}

void SpectralInverse::apply(const double* r, double* u) const {
  const std::int64_t m = impl_->grid.nodes();
  std::copy(r, r + m, impl_->real_buf);
  fftw_execute(impl_->fwd);
  for (std::int64_t i = 0; i < impl_->half; ++i) {
    const double f = impl_->inv_symbol[static_cast<std::size_t>(i)];
    impl_->cplx_buf[i][0] *= f;
    impl_->cplx_buf[i][1] *= f;
  }
  fftw_execute(impl_->bwd);
  std::copy(impl_->real_buf, impl_->real_buf + m, u);
}

class BorderedOp;
class BorderedPrecond;

}  // namespace linf::detail

namespace Eigen::internal {
template <>
struct traits<linf::detail::BorderedOp> : public traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace linf::detail {

class BorderedOp : public Eigen::EigenBase<BorderedOp> {
 public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  Eigen::Index rows() const { return size; }
  Eigen::Index cols() const { return size; }

  template <typename Rhs>
  Eigen::Product<BorderedOp, Rhs, Eigen::AliasFreeProduct> operator*(
      const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<BorderedOp, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    const Eigen::Index m = size - 1;
    const Eigen::VectorXd u = x.head(m);
    Eigen::VectorXd lu;
    (*L)(u, lu);
    y.resize(size);
    y.head(m) = lu.array() - x[m];
    y[m] = u.mean();
  }

  void precondition(const Eigen::VectorXd& b, Eigen::VectorXd& out) const {
    const Eigen::Index m = size - 1;
    const double rbar = b.head(m).mean();
    const Eigen::VectorXd r = b.head(m).array() - rbar;
    out.resize(size);
    spectral->apply(r.data(), out.data());
    out.head(m).array() += b[m];
    out[m] = -rbar;
  }

  Eigen::Index size = 0;
  const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>* L = nullptr;
  const SpectralInverse* spectral = nullptr;
};

class BorderedPrecond {
 public:
  using Scalar = double;
  using RealScalar = double;
  BorderedPrecond() = default;
  template <typename MatType>
  explicit BorderedPrecond(const MatType& m) : op_(&m) {}
  template <typename MatType>
  BorderedPrecond& analyzePattern(const MatType&) { return *this; }
  template <typename MatType>
  BorderedPrecond& factorize(const MatType&) { return *this; }
  BorderedPrecond& compute(const BorderedOp& m) {
    op_ = &m;
    return *this;
  }
  template <typename Rhs>
  Eigen::VectorXd solve(const Eigen::MatrixBase<Rhs>& b) const {
    Eigen::VectorXd in = b;
    Eigen::VectorXd out;
    op_->precondition(in, out);
    return out;
  }
  Eigen::ComputationInfo info() const { return Eigen::Success; }

 private:
  const BorderedOp* op_ = nullptr;
};

}  // namespace linf::detail

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<linf::detail::BorderedOp, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<linf::detail::BorderedOp, Rhs,
                                generic_product_impl<linf::detail::BorderedOp, Rhs>> {
  using Scalar = typename Product<linf::detail::BorderedOp, Rhs>::Scalar;
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const linf::detail::BorderedOp& lhs, const Rhs& rhs,
                            const Scalar& alpha) {
    Eigen::VectorXd x = rhs;
    Eigen::VectorXd y;
    lhs.apply(x, y);
    dst.noalias() += alpha * y;
  }
};
}  // namespace Eigen::internal

namespace linf::detail {

BorderedResult solve_bordered(const TorusGrid& grid,
                              const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& L,
                              const SpectralInverse& precond, const Eigen::VectorXd& r, double m,
                              double rel_tol, int max_iter, int restart) {
  const Eigen::Index nodes = grid.nodes();
  if (r.size() != nodes) throw DomainError("bordered solve: rhs size mismatch");
  BorderedOp op;
  op.size = nodes + 1;
  op.L = &L;
  op.spectral = &precond;

  Eigen::VectorXd b(nodes + 1);
  b.head(nodes) = r;
  b[nodes] = m;

  (void)restart;
  Eigen::BiCGSTAB<BorderedOp, BorderedPrecond> krylov;
  krylov.compute(op);
  krylov.setMaxIterations(max_iter);
  // Eigen measures |b - Ax| / |b| in the 2-norm; the sup-norm target is
  // tightened by the square root of the system size.
  krylov.setTolerance(rel_tol / std::sqrt(static_cast<double>(nodes)));

  // Start from the preconditioned rhs; for constant coefficients it is exact.
  Eigen::VectorXd x;
  op.precondition(b, x);

  BorderedResult res;
  const double rscale = std::max(r.cwiseAbs().maxCoeff(), std::abs(m));
  auto true_residual = [&](const Eigen::VectorXd& xx) {
    Eigen::VectorXd y;
    op.apply(xx, y);
    return (y - b).cwiseAbs().maxCoeff() / (rscale > 0 ? rscale : 1.0);
  };
  res.residual = true_residual(x);
  for (int attempt = 0; attempt < 4 && res.residual > rel_tol; ++attempt) {
    x = krylov.solveWithGuess(b, x);
    res.iterations += static_cast<int>(krylov.iterations());
    res.residual = true_residual(x);
  }
  res.converged = res.residual <= rel_tol;
  res.u = x.head(nodes);
  res.c = x[nodes];
  return res;
}

}  // namespace linf::detail
