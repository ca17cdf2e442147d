#pragma once

// Symmetric-function operators on Garding cones: elementary symmetric
// polynomials, the built-in operators f(lambda), their analytic gradients and
// the inverse-eigenvalue transform f~(l~) = 1 / f(1/l~).

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace linf {

/// Eigenvalues of a relative endomorphism, one entry per complex direction.
using EigenTuple = std::vector<double>;

/// Garding cone Gamma_k = { sigma_j > 0 for j = 1..k }.
struct ConeId {
  int k = 1;
};

enum class OperatorKind {
  MongeAmpere,      // (prod lambda_i)^{1/n}
  SigmaK,           // sigma_k^{1/k}
  HessianQuotient,  // (sigma_n / sigma_k)^{1/(n-k)}
  J,                // sigma_n / sigma_{n-1}
};

/// A positive, degree-one homogeneous, elliptic symmetric function on a cone.
class ConeOperator {
 public:
  static ConeOperator monge_ampere(int n);
  static ConeOperator sigma_k(int n, int k);
  static ConeOperator hessian_quotient(int n, int k);
  static ConeOperator j_operator(int n);

  OperatorKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return n_; }
  /// Index parameter of SigmaK / HessianQuotient; n for the other kinds.
  int k() const noexcept { return k_; }
  ConeId domain() const noexcept;
  std::string name() const;

 private:
  ConeOperator(OperatorKind kind, int n, int k) : kind_(kind), n_(n), k_(k) {}

  OperatorKind kind_;
  int n_;
  int k_;
};

struct OpValue {
  double value = 0.0;
  EigenTuple grad;
};

/// sigma_k(lambda); sigma_0 = 1.
double sigma(int k, std::span<const double> lam);

/// All of sigma_0 .. sigma_n in one pass.
std::vector<double> sigma_all(std::span<const double> lam);

bool cone_contains(ConeId cone, std::span<const double> lam);

/// f(lambda) and its analytic gradient. Throws ConeError outside the domain.
OpValue op_eval(const ConeOperator& op, std::span<const double> lam);

/// f~(l~) = 1/f(1/l~) and its gradient, for l~ in the positive orthant.
OpValue tilde_eval(const ConeOperator& op, std::span<const double> lam_tilde);

struct RayOptions {
  double t_max = 1e6;
  double rel_tol = 1e-12;
};

/// Smallest t >= 0 with f(base + t dir) = level, for dir in the closed
/// positive orthant. Returns nullopt when the ray never enters the cone or f
/// stays below level up to t_max. Throws LevelPassedError when f already
/// exceeds level at the point where the ray enters the cone.
std::optional<double> boundary_cross(const ConeOperator& op, double level,
                                     std::span<const double> base,
                                     std::span<const double> dir,
                                     const RayOptions& opts = {});

/// Entry parameter of the ray base + t dir into the operator's cone (0 when
/// base is already inside), or nullopt if it never enters before t_max.
std::optional<double> ray_entry(const ConeOperator& op, std::span<const double> base,
                                std::span<const double> dir, double t_max);

/// Value/gradient callback used to run the structure checks on arbitrary
/// (possibly deliberately broken) operators.
struct OperatorFunction {
  std::string name;
  int n = 1;
  ConeId domain;
  std::function<OpValue(std::span<const double>)> eval;
};

OperatorFunction as_function(const ConeOperator& op);

struct StructureReport {
  std::string op_name;
  int samples = 0;
  double homogeneity_max = 0.0;   // max |f(t l) - t f(l)| / (t f(l))
  double grad_min = 0.0;          // smallest gradient component seen
  double grad_fd_max = 0.0;       // max relative error vs central differences
  double concavity_max = 0.0;     // max of (f~(x)+f~(y))/2 - f~((x+y)/2), relative
  double euler_max = 0.0;         // max |sum l~_j df~_j - f~| / f~
  double involution_max = 0.0;    // max relative error of 1/f~(1/l) vs f(l)

  bool homogeneity_ok(double tol = 1e-9) const { return homogeneity_max <= tol; }
  bool gradient_ok() const { return grad_min > 0.0; }
  bool concavity_ok(double tol = 1e-9) const { return concavity_max <= tol; }
  bool euler_ok(double tol = 1e-10) const { return euler_max <= tol; }
};

StructureReport check_structure(const ConeOperator& op, int sample_count, std::uint64_t seed);
StructureReport check_structure(const OperatorFunction& fn, int sample_count, std::uint64_t seed);

/// Random point in the interior of Gamma_k (dimension n), used by the
/// structure checks and by tests.
EigenTuple sample_cone_point(int n, ConeId cone, std::mt19937_64& rng);

}  // namespace linf
