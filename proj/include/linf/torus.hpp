#pragma once

// Discrete flat torus [0,1)^{2n}: grid, fields, the complex Hessian,
// volume/entropy functionals, Green's functions, sublevel profiles and
// random omega-plurisubharmonic test functions.

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "linf/hermalg.hpp"

namespace linf {

/// Real axes are ordered x1, y1, x2, y2, ...; node index is row-major with
/// the last axis fastest.
class TorusGrid {
 public:
  TorusGrid(int n, int N);

  int n() const noexcept { return n_; }
  int N() const noexcept { return N_; }
  int axes() const noexcept { return 2 * n_; }
  double h() const noexcept { return 1.0 / N_; }
  std::int64_t nodes() const noexcept { return nodes_; }
  double cell_volume() const noexcept { return cell_; }

  std::int64_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
  int coord(std::int64_t idx, int axis) const {
    return static_cast<int>((idx / stride(axis)) % N_);
  }
  /// Periodic neighbour of idx, d steps along axis.
  std::int64_t shift(std::int64_t idx, int axis, int d) const {
    if (!nb_.empty() && (d == 1 || d == -1)) {
      return nb_[static_cast<std::size_t>((2 * axis + (d > 0 ? 0 : 1)) * nodes_ + idx)];
    }
    const int c = coord(idx, axis);
    int c2 = (c + d) % N_;
    if (c2 < 0) c2 += N_;
    return idx + static_cast<std::int64_t>(c2 - c) * stride(axis);
  }
  std::int64_t index(const std::vector<int>& coords) const;
  std::vector<int> coords(std::int64_t idx) const;
  /// Real coordinates of a node in [0,1)^{2n}.
  std::vector<double> point(std::int64_t idx) const;

 private:
  int n_;
  int N_;
  std::int64_t nodes_;
  double cell_;
  std::vector<std::int64_t> strides_;
  std::vector<std::int32_t> nb_;  // +/- neighbours per axis, when small enough
};

using ScalarField = Eigen::VectorXd;

/// One n x n Hermitian matrix per node, column-major within a node.
class HermitianMetricField {
 public:
  HermitianMetricField() = default;
  HermitianMetricField(int n, std::int64_t nodes);

  static HermitianMetricField constant(const TorusGrid& grid, const HermMatrix& m);

  int n() const noexcept { return n_; }
  std::int64_t nodes() const noexcept { return nodes_; }

  std::complex<double>* node(std::int64_t i) { return data_.data() + i * n_ * n_; }
  const std::complex<double>* node(std::int64_t i) const { return data_.data() + i * n_ * n_; }
  HermMatrix at(std::int64_t i) const;
  void set(std::int64_t i, const HermMatrix& m);

  /// Node average.
  HermMatrix mean() const;
  /// True when every node equals node 0 to within tol (absolute).
  bool is_uniform(double tol = 0.0) const;

  HermitianMetricField& operator+=(const HermitianMetricField& other);
  HermitianMetricField& operator*=(double c);

  const std::vector<std::complex<double>>& raw() const noexcept { return data_; }
  std::vector<std::complex<double>>& raw() noexcept { return data_; }

 private:
  int n_ = 0;
  std::int64_t nodes_ = 0;
  std::vector<std::complex<double>> data_;
};

HermitianMetricField operator+(HermitianMetricField a, const HermitianMetricField& b);
HermitianMetricField operator*(double c, HermitianMetricField a);

/// phi_{z_i zbar_j} by second-order central differences with periodic wrap.
HermitianMetricField ddbar(const TorusGrid& grid, const ScalarField& phi);

/// Re tr(C . ddbar phi) at every node, C a per-node Hermitian coefficient.
ScalarField trace_ddbar(const TorusGrid& grid, const HermitianMetricField& coeff,
                        const ScalarField& phi);
/// Same with one constant coefficient.
ScalarField trace_ddbar(const TorusGrid& grid, const HermMatrix& coeff, const ScalarField& phi);

/// Per-node inverse of a positive definite field.
HermitianMetricField inverse(const HermitianMetricField& g);

/// Laplacian tr_omega ddbar phi.
ScalarField laplacian(const TorusGrid& grid, const HermitianMetricField& omega,
                      const ScalarField& phi);

/// Volume weights det g * h^{2n}.
ScalarField volume_weights(const TorusGrid& grid, const HermitianMetricField& omega);

/// Eigenvalues of omega^{-1} chi per node, ascending, nodes x n.
Eigen::MatrixXd relative_eigs_field(const HermitianMetricField& omega,
                                    const HermitianMetricField& chi);

/// Smallest eigenvalue of omega^{-1} chi over all nodes.
double min_relative_eig(const HermitianMetricField& omega, const HermitianMetricField& chi);

/// Constant field / field from a function of the real coordinates.
ScalarField make_field(const TorusGrid& grid,
                       const std::function<double(const std::vector<double>&)>& fn);

struct MetricFunctionals {
  double V_omega = 0.0;
  ScalarField F_field;
  double N_p = 0.0;
  double pairing = 0.0;
  double gamma_min = 0.0;
  /// (1/V) sum e^F det g_X h^{2n}; equals 1 up to rounding.
  double normalization = 0.0;
};

MetricFunctionals metric_functionals(const TorusGrid& grid, const HermitianMetricField& omega,
                                     const HermitianMetricField& omega_X, double p);

/// gamma_floor has one entry per node, or a single entry used everywhere.
bool kset_membership(const MetricFunctionals& mf, double A, double K,
                     const ScalarField& gamma_floor);

struct GreenOptions {
  double tol = 1e-12;
  int max_iter = 500;
};

struct GreenResult {
  ScalarField G;
  std::int64_t x0 = 0;
  double sup_neg = 0.0;   // sup(-G)
  double l1 = 0.0;        // sum |G| det g h^{2n}
  double C0 = 0.0;        // sup(-G) V + l1
  double residual = 0.0;  // sup |(-Delta G) - (delta/w - 1/V)| relative to 1/w
  double shift = 0.0;     // compatibility constant absorbed by the solve
};

/// Green's function of -Delta_omega with pole x0, normalized to weighted mean 0.
GreenResult green(const TorusGrid& grid, const HermitianMetricField& omega, std::int64_t x0,
                  const GreenOptions& opts = {});

/// max over the given poles of the per-point C0. For a uniform omega every
/// pole gives the same value, so a single solve is used.
double green_C0(const TorusGrid& grid, const HermitianMetricField& omega,
                const std::vector<std::int64_t>& poles, const GreenOptions& opts = {});

struct LevelSetProfile {
  std::vector<double> s_grid;
  std::vector<double> phi_of_s;
  std::vector<double> A_of_s;
};

LevelSetProfile level_profile(const TorusGrid& grid, const ScalarField& phi_prime,
                              const HermitianMetricField& omega, const std::vector<double>& s_list);

struct PshSampleOptions {
  int modes = 8;
  int max_frequency = 3;
  double margin_fraction = 0.01;
};

struct PshSample {
  ScalarField psi;
  double amplitude = 0.0;
  double amplitude_max = 0.0;
  double margin = 0.0;  // min eigenvalue of omega + ddbar psi over nodes
};

PshSample sample_psh_detailed(const TorusGrid& grid, const HermitianMetricField& omega,
                              std::uint64_t seed, const PshSampleOptions& opts = {});
ScalarField sample_psh(const TorusGrid& grid, const HermitianMetricField& omega,
                       std::uint64_t seed, const PshSampleOptions& opts = {});

/// Random band-limited trigonometric field with zero mean (deterministic in seed).
ScalarField random_trig_field(const TorusGrid& grid, std::uint64_t seed, int modes,
                              int max_frequency);

}  // namespace linf
