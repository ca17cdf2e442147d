#include "linf/torus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "linf/error.hpp"
#include "linf/parallel.hpp"
#include "nodeops.hpp"

namespace linf {

using detail::CMat;
using detail::dispatch_dim;
using detail::RVec;

TorusGrid::TorusGrid(int n, int N) : n_(n), N_(N) {
  if (n < 1 || n > 4) throw DomainError("complex dimension must be 1..4");
  if (N < 8 || N % 2 != 0) throw DomainError("nodes per axis must be even and >= 8");
  nodes_ = 1;
  for (int a = 0; a < 2 * n; ++a) nodes_ *= N;
  cell_ = std::pow(1.0 / N, 2 * n);
  strides_.assign(static_cast<std::size_t>(2 * n), 1);
  for (int a = 2 * n - 2; a >= 0; --a) {
    strides_[static_cast<std::size_t>(a)] = strides_[static_cast<std::size_t>(a + 1)] * N;
  }
  if (nodes_ * 4 * n <= (std::int64_t{1} << 26)) {
    std::vector<std::int32_t> nb(static_cast<std::size_t>(nodes_ * 4 * n));
    for (int a = 0; a < 2 * n; ++a) {
      for (std::int64_t i = 0; i < nodes_; ++i) {
        nb[static_cast<std::size_t>(2 * a * nodes_ + i)] = static_cast<std::int32_t>(shift(i, a, 1));
        nb[static_cast<std::size_t>((2 * a + 1) * nodes_ + i)] = static_cast<std::int32_t>(shift(i, a, -1));
      }
    }
    nb_ = std::move(nb);
  }
}

std::int64_t TorusGrid::index(const std::vector<int>& c) const {
  if (static_cast<int>(c.size()) != axes()) throw DomainError("coordinate count mismatch");
  std::int64_t idx = 0;
  for (int a = 0; a < axes(); ++a) {
    int v = c[static_cast<std::size_t>(a)] % N_;
    if (v < 0) v += N_;
    idx += v * stride(a);
  }
  return idx;
}

std::vector<int> TorusGrid::coords(std::int64_t idx) const {
  std::vector<int> c(static_cast<std::size_t>(axes()));
  for (int a = 0; a < axes(); ++a) c[static_cast<std::size_t>(a)] = coord(idx, a);
  return c;
}

std::vector<double> TorusGrid::point(std::int64_t idx) const {
  std::vector<double> x(static_cast<std::size_t>(axes()));
  for (int a = 0; a < axes(); ++a) x[static_cast<std::size_t>(a)] = coord(idx, a) * h();
  return x;
}

HermitianMetricField::HermitianMetricField(int n, std::int64_t nodes)
    : n_(n), nodes_(nodes), data_(static_cast<std::size_t>(nodes * n * n)) {}

HermitianMetricField HermitianMetricField::constant(const TorusGrid& grid, const HermMatrix& m) {
  if (m.rows() != grid.n() || m.cols() != grid.n()) throw DomainError("matrix size != n");
  HermitianMetricField f(grid.n(), grid.nodes());
  for (std::int64_t i = 0; i < f.nodes_; ++i) f.set(i, m);
  return f;
}

HermMatrix HermitianMetricField::at(std::int64_t i) const {
  return Eigen::Map<const HermMatrix>(node(i), n_, n_);
}

void HermitianMetricField::set(std::int64_t i, const HermMatrix& m) {
  Eigen::Map<HermMatrix>(node(i), n_, n_) = m;
}

HermMatrix HermitianMetricField::mean() const {
  HermMatrix acc = HermMatrix::Zero(n_, n_);
  for (std::int64_t i = 0; i < nodes_; ++i) acc += Eigen::Map<const HermMatrix>(node(i), n_, n_);
  return acc / static_cast<double>(nodes_);
}

bool HermitianMetricField::is_uniform(double tol) const {
  const std::size_t m = static_cast<std::size_t>(n_ * n_);
  for (std::size_t k = m; k < data_.size(); ++k) {
    if (std::abs(data_[k] - data_[k % m]) > tol) return false;
  }
  return true;
}

HermitianMetricField& HermitianMetricField::operator+=(const HermitianMetricField& o) {
  if (o.n_ != n_ || o.nodes_ != nodes_) throw DomainError("field shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

HermitianMetricField& HermitianMetricField::operator*=(double c) {
  for (auto& v : data_) v *= c;
  return *this;
}

HermitianMetricField operator+(HermitianMetricField a, const HermitianMetricField& b) {
  a += b;
  return a;
}

HermitianMetricField operator*(double c, HermitianMetricField a) {
  a *= c;
  return a;
}

namespace {

struct Stencil {
  const TorusGrid& g;
  const double* phi;
  double inv_h2;

  double d2(std::int64_t idx, int a) const {
    return (phi[g.shift(idx, a, 1)] - 2.0 * phi[idx] + phi[g.shift(idx, a, -1)]) * inv_h2;
  }
  double mixed(std::int64_t idx, int a, int b) const {
    const std::int64_t p = g.shift(idx, a, 1);
    const std::int64_t m = g.shift(idx, a, -1);
    return (phi[g.shift(p, b, 1)] - phi[g.shift(p, b, -1)] - phi[g.shift(m, b, 1)] +
            phi[g.shift(m, b, -1)]) *
           (0.25 * inv_h2);
  }
  /// Entry (i, j), i < j, of the complex Hessian.
  std::complex<double> off(std::int64_t idx, int i, int j) const {
    const int xi = 2 * i, yi = 2 * i + 1, xj = 2 * j, yj = 2 * j + 1;
    return 0.25 * std::complex<double>(mixed(idx, xi, xj) + mixed(idx, yi, yj),
                                       mixed(idx, xi, yj) - mixed(idx, yi, xj));
  }
  double diag(std::int64_t idx, int i) const { return 0.25 * (d2(idx, 2 * i) + d2(idx, 2 * i + 1)); }
};

void check_size(const TorusGrid& grid, const ScalarField& phi) {
  if (phi.size() != grid.nodes()) throw DomainError("field size does not match grid");
}

void check_size(const TorusGrid& grid, const HermitianMetricField& f) {
  if (f.nodes() != grid.nodes() || f.n() != grid.n()) {
    throw DomainError("metric field shape does not match grid");
  }
}

}  // namespace

HermitianMetricField ddbar(const TorusGrid& grid, const ScalarField& phi) {
  check_size(grid, phi);
  const int n = grid.n();
  HermitianMetricField out(n, grid.nodes());
  const Stencil st{grid, phi.data(), 1.0 / (grid.h() * grid.h())};
  parallel_for(grid.nodes(), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t idx = b; idx < e; ++idx) {
      std::complex<double>* H = out.node(idx);
      for (int i = 0; i < n; ++i) {
        H[i + i * n] = st.diag(idx, i);
        for (int j = i + 1; j < n; ++j) {
          const std::complex<double> v = st.off(idx, i, j);
          H[i + j * n] = v;
          H[j + i * n] = std::conj(v);
        }
      }
    }
  });
  return out;
}

namespace {

// Re tr(C H) = sum_i C_ii H_ii + 2 sum_{i<j} Re(C_ij conj(H_ij)).
double trace_node(const Stencil& st, std::int64_t idx, const std::complex<double>* C, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += C[i + i * n].real() * st.diag(idx, i);
    for (int j = i + 1; j < n; ++j) {
      const std::complex<double> h = st.off(idx, i, j);
      const std::complex<double> c = C[i + j * n];
      acc += 2.0 * (c.real() * h.real() + c.imag() * h.imag());
    }
  }
  return acc;
}

}  // namespace

ScalarField trace_ddbar(const TorusGrid& grid, const HermitianMetricField& coeff,
                        const ScalarField& phi) {
  check_size(grid, phi);
  check_size(grid, coeff);
  ScalarField out(grid.nodes());
  const Stencil st{grid, phi.data(), 1.0 / (grid.h() * grid.h())};
  parallel_for(grid.nodes(), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t idx = b; idx < e; ++idx) {
      out[idx] = trace_node(st, idx, coeff.node(idx), grid.n());
    }
  });
  return out;
}

ScalarField trace_ddbar(const TorusGrid& grid, const HermMatrix& coeff, const ScalarField& phi) {
  check_size(grid, phi);
  ScalarField out(grid.nodes());
  const Stencil st{grid, phi.data(), 1.0 / (grid.h() * grid.h())};
  const HermMatrix C = coeff;
  parallel_for(grid.nodes(), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t idx = b; idx < e; ++idx) out[idx] = trace_node(st, idx, C.data(), grid.n());
  });
  return out;
}

HermitianMetricField inverse(const HermitianMetricField& g) {
  HermitianMetricField out(g.n(), g.nodes());
  dispatch_dim(g.n(), [&](auto dim) {
    constexpr int D = decltype(dim)::value;
    parallel_for(g.nodes(), [&](std::int64_t b, std::int64_t e) {
      for (std::int64_t i = b; i < e; ++i) {
        const CMat<D> m = detail::load<D>(g.node(i), g.n());
        Eigen::LLT<CMat<D>> llt(m);
        if (llt.info() != Eigen::Success) throw DomainError("metric is not positive definite");
        CMat<D> inv = llt.solve(CMat<D>::Identity(g.n(), g.n()));
        detail::store<D>((0.5 * (inv + inv.adjoint())).eval(), out.node(i));
      }
    });
  });
  return out;
}

ScalarField laplacian(const TorusGrid& grid, const HermitianMetricField& omega,
                      const ScalarField& phi) {
  check_size(grid, omega);
  if (omega.is_uniform()) return trace_ddbar(grid, omega.at(0).inverse().eval(), phi);
  return trace_ddbar(grid, inverse(omega), phi);
}

ScalarField volume_weights(const TorusGrid& grid, const HermitianMetricField& omega) {
  check_size(grid, omega);
  ScalarField w(grid.nodes());
  dispatch_dim(grid.n(), [&](auto dim) {
    constexpr int D = decltype(dim)::value;
    for (std::int64_t i = 0; i < grid.nodes(); ++i) {
      const CMat<D> m = detail::load<D>(omega.node(i), grid.n());
      Eigen::LLT<CMat<D>> llt(m);
      if (llt.info() != Eigen::Success) throw DomainError("metric is not positive definite");
      double det = 1.0;
      for (int k = 0; k < grid.n(); ++k) det *= std::norm(llt.matrixLLT()(k, k));
      w[i] = det * grid.cell_volume();
    }
  });
  return w;
}

Eigen::MatrixXd relative_eigs_field(const HermitianMetricField& omega,
                                    const HermitianMetricField& chi) {
  if (omega.n() != chi.n() || omega.nodes() != chi.nodes()) {
    throw DomainError("field shape mismatch");
  }
  const int n = omega.n();
  Eigen::MatrixXd out(omega.nodes(), n);
  dispatch_dim(n, [&](auto dim) {
    constexpr int D = decltype(dim)::value;
    parallel_for(omega.nodes(), [&](std::int64_t b, std::int64_t e) {
      RVec<D> lam;
      for (std::int64_t i = b; i < e; ++i) {
        if (!detail::relative_eig<D>(detail::load<D>(omega.node(i), n),
                                     detail::load<D>(chi.node(i), n), lam)) {
          throw DomainError("omega is not positive definite at node " + std::to_string(i));
        }
        out.row(i) = lam.transpose();
      }
    });
  });
  return out;
}

double min_relative_eig(const HermitianMetricField& omega, const HermitianMetricField& chi) {
  return relative_eigs_field(omega, chi).col(0).minCoeff();
}

ScalarField make_field(const TorusGrid& grid,
                       const std::function<double(const std::vector<double>&)>& fn) {
  ScalarField f(grid.nodes());
  for (std::int64_t i = 0; i < grid.nodes(); ++i) f[i] = fn(grid.point(i));
  return f;
}

MetricFunctionals metric_functionals(const TorusGrid& grid, const HermitianMetricField& omega,
                                     const HermitianMetricField& omega_X, double p) {
  if (!(p > grid.n())) throw DomainError("entropy exponent p must exceed n");
  const ScalarField w = volume_weights(grid, omega);
  const ScalarField wX = volume_weights(grid, omega_X);
  MetricFunctionals mf;
  mf.V_omega = w.sum();
  mf.F_field = ((w.array() / wX.array()) / mf.V_omega).log().matrix();
  const Eigen::ArrayXd eF = mf.F_field.array().exp();
  mf.N_p = (mf.F_field.array().abs().pow(p) * eF * wX.array()).sum();
  mf.gamma_min = eF.minCoeff();
  mf.normalization = (eF * wX.array()).sum();
  // pairing = (1/n) sum tr_{g_X}(g) det g_X h^{2n}
  const Eigen::MatrixXd tr = relative_eigs_field(omega_X, omega);
  mf.pairing = (tr.rowwise().sum().array() * wX.array()).sum() / grid.n();
  return mf;
}

bool kset_membership(const MetricFunctionals& mf, double A, double K,
                     const ScalarField& gamma_floor) {
  if (mf.pairing > A || mf.N_p > K) return false;
  const Eigen::Index m = mf.F_field.size();
  if (gamma_floor.size() != 1 && gamma_floor.size() != m) {
    throw DomainError("gamma floor must have one entry or one per node");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    const double gam = gamma_floor.size() == 1 ? gamma_floor[0] : gamma_floor[i];
    if (std::exp(mf.F_field[i]) < gam) return false;
  }
  return true;
}

LevelSetProfile level_profile(const TorusGrid& grid, const ScalarField& phi_prime,
                              const HermitianMetricField& omega, const std::vector<double>& s_list) {
  check_size(grid, phi_prime);
  const ScalarField w = volume_weights(grid, omega);
  const double V = w.sum();
  LevelSetProfile prof;
  prof.s_grid = s_list;
  for (double s : s_list) {
    double vol = 0.0, a = 0.0;
    for (Eigen::Index i = 0; i < phi_prime.size(); ++i) {
      if (phi_prime[i] < -s) {
        vol += w[i];
        a += (-phi_prime[i] - s) * w[i];
      }
    }
    prof.phi_of_s.push_back(vol / V);
    prof.A_of_s.push_back(a / V);
  }
  return prof;
}

ScalarField random_trig_field(const TorusGrid& grid, std::uint64_t seed, int modes,
                              int max_frequency) {
  if (modes < 1 || max_frequency < 1) throw DomainError("need at least one mode and frequency");
  if (2 * max_frequency >= grid.N()) throw DomainError("frequency too high for the grid");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kd(-max_frequency, max_frequency);
  std::normal_distribution<double> ad(0.0, 1.0);
  std::uniform_real_distribution<double> pd(0.0, 2.0 * std::numbers::pi);
  ScalarField u = ScalarField::Zero(grid.nodes());
  const int axes = grid.axes();
  for (int m = 0; m < modes; ++m) {
    std::vector<int> k(static_cast<std::size_t>(axes));
    bool zero = true;
    while (zero) {
      for (auto& v : k) v = kd(rng);
      zero = std::all_of(k.begin(), k.end(), [](int v) { return v == 0; });
    }
    double k2 = 0.0;
    for (int v : k) k2 += v * v;
    const double amp = ad(rng) / k2;
    const double phase = pd(rng);
    // k . x only takes the values 2 pi j / N, so tabulate the cosine.
    const int N = grid.N();
    std::vector<double> table(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) {
      table[static_cast<std::size_t>(j)] = amp * std::cos(phase + 2.0 * std::numbers::pi * j / N);
    }
    std::vector<int> c(static_cast<std::size_t>(axes), 0);
    for (std::int64_t i = 0; i < grid.nodes(); ++i) {
      long j = 0;
      for (int a = 0; a < axes; ++a) {
        j += static_cast<long>(k[static_cast<std::size_t>(a)]) * c[static_cast<std::size_t>(a)];
      }
      j %= N;
      if (j < 0) j += N;
      u[i] += table[static_cast<std::size_t>(j)];
      for (int a = axes - 1; a >= 0 && ++c[static_cast<std::size_t>(a)] == N; --a) {
        c[static_cast<std::size_t>(a)] = 0;
      }
    }
  }
  return u;
}

PshSample sample_psh_detailed(const TorusGrid& grid, const HermitianMetricField& omega,
                              std::uint64_t seed, const PshSampleOptions& opts) {
  check_size(grid, omega);
  const int n = grid.n();
  const ScalarField u = random_trig_field(grid, seed, opts.modes, opts.max_frequency);
  const HermitianMetricField H = ddbar(grid, u);

  double lam_min = std::numeric_limits<double>::infinity();
  dispatch_dim(n, [&](auto dim) {
    constexpr int D = decltype(dim)::value;
    for (std::int64_t i = 0; i < grid.nodes(); ++i) {
      lam_min = std::min(lam_min, detail::min_eig<D>(detail::load<D>(omega.node(i), n)));
    }
  });
  if (!(lam_min > 0.0)) throw DomainError("omega is not positive definite");
  const double margin = opts.margin_fraction * lam_min;

  // Largest a with g + a H >= margin at every node: with P = g - margin I,
  // this is a <= -1/mu_min where mu_min is the smallest eigenvalue of H
  // relative to P.
  double a_max = std::numeric_limits<double>::infinity();
  dispatch_dim(n, [&](auto dim) {
    constexpr int D = decltype(dim)::value;
    RVec<D> mu;
    for (std::int64_t i = 0; i < grid.nodes(); ++i) {
      CMat<D> P = detail::load<D>(omega.node(i), n);
      P -= margin * CMat<D>::Identity(n, n);
      if (!detail::relative_eig<D>(P, detail::load<D>(H.node(i), n), mu)) {
        throw DomainError("omega - margin is not positive definite");
      }
      if (mu(0) < 0.0) a_max = std::min(a_max, -1.0 / mu(0));
    }
  });
  if (!std::isfinite(a_max) || !(a_max > 0.0)) {
    throw DomainError("no admissible amplitude for the PSH sample (degenerate omega)");
  }
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> fd(0.5, 1.0);
  PshSample out;
  out.amplitude_max = a_max;
  out.amplitude = fd(rng) * a_max;
  out.psi = out.amplitude * u;
  out.psi.array() -= out.psi.maxCoeff();

  HermitianMetricField total = omega;
  total += out.amplitude * H;
  double mg = std::numeric_limits<double>::infinity();
  dispatch_dim(n, [&](auto dim) {
    constexpr int D = decltype(dim)::value;
    for (std::int64_t i = 0; i < grid.nodes(); ++i) {
      mg = std::min(mg, detail::min_eig<D>(detail::load<D>(total.node(i), n)));
    }
  });
  out.margin = mg;
  if (!(mg > 0.0)) throw DomainError("PSH sample lost positivity");
  return out;
}

ScalarField sample_psh(const TorusGrid& grid, const HermitianMetricField& omega,
                       std::uint64_t seed, const PshSampleOptions& opts) {
  return sample_psh_detailed(grid, omega, seed, opts).psi;
}

}  // namespace linf
