#include "linf/symfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "linf/error.hpp"

namespace linf {

const char* to_string(SolveFailure f) {
  switch (f) {
    case SolveFailure::NonConvergence: return "non-convergence";
    case SolveFailure::PositivityLoss: return "positivity loss";
    case SolveFailure::IncompatibleData: return "incompatible data";
    case SolveFailure::NoAdmissibleStart: return "no admissible start";
    case SolveFailure::ConeExit: return "cone exit";
    case SolveFailure::LinearSolve: return "linear solve failure";
    case SolveFailure::EmptySublevel: return "empty sublevel set";
  }
  return "unknown";
}

namespace {

void require_dim(const ConeOperator& op, std::span<const double> lam) {
  if (static_cast<int>(lam.size()) != op.dim()) {
    throw DomainError("eigenvalue tuple has length " + std::to_string(lam.size()) +
                      ", operator " + op.name() + " expects " + std::to_string(op.dim()));
  }
}

// sigma_j of lam with entry i removed, j = 0..n-1.
std::vector<double> sigma_all_without(std::span<const double> lam, std::size_t skip) {
  std::vector<double> e(lam.size(), 0.0);
  e[0] = 1.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < lam.size(); ++i) {
    if (i == skip) continue;
    ++m;
    for (std::size_t j = m; j >= 1; --j) e[j] += lam[i] * e[j - 1];
  }
  return e;
}

}  // namespace

ConeOperator ConeOperator::monge_ampere(int n) {
  if (n < 1) throw DomainError("dimension must be >= 1");
  return {OperatorKind::MongeAmpere, n, n};
}

ConeOperator ConeOperator::sigma_k(int n, int k) {
  if (n < 1 || k < 1 || k > n) throw DomainError("SigmaK needs 1 <= k <= n");
  return {OperatorKind::SigmaK, n, k};
}

ConeOperator ConeOperator::hessian_quotient(int n, int k) {
  if (n < 2 || k < 1 || k >= n) throw DomainError("HessianQuotient needs 1 <= k < n");
  return {OperatorKind::HessianQuotient, n, k};
}

ConeOperator ConeOperator::j_operator(int n) {
  if (n < 1) throw DomainError("dimension must be >= 1");
  return {OperatorKind::J, n, n};
}

ConeId ConeOperator::domain() const noexcept {
  return kind_ == OperatorKind::SigmaK ? ConeId{k_} : ConeId{n_};
}

std::string ConeOperator::name() const {
  switch (kind_) {
    case OperatorKind::MongeAmpere: return "MongeAmpere";
    case OperatorKind::SigmaK: return "SigmaK(" + std::to_string(k_) + ")";
    case OperatorKind::HessianQuotient: return "HessianQuotient(" + std::to_string(k_) + ")";
    case OperatorKind::J: return "J";
  }
  return "?";
}

std::vector<double> sigma_all(std::span<const double> lam) {
  std::vector<double> e(lam.size() + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < lam.size(); ++i) {
    for (std::size_t j = i + 1; j >= 1; --j) e[j] += lam[i] * e[j - 1];
  }
  return e;
}

double sigma(int k, std::span<const double> lam) {
  if (k < 0 || k > static_cast<int>(lam.size())) {
    throw DomainError("sigma_k: k = " + std::to_string(k) + " outside 0.." +
                      std::to_string(lam.size()));
  }
  return sigma_all(lam)[static_cast<std::size_t>(k)];
}

bool cone_contains(ConeId cone, std::span<const double> lam) {
  const int n = static_cast<int>(lam.size());
  if (cone.k < 1 || cone.k > n) throw DomainError("cone index outside 1..n");
  if (cone.k == n) {
    return std::all_of(lam.begin(), lam.end(), [](double x) { return x > 0.0; });
  }
  const auto e = sigma_all(lam);
  for (int j = 1; j <= cone.k; ++j) {
    if (!(e[static_cast<std::size_t>(j)] > 0.0)) return false;
  }
  return true;
}

OpValue op_eval(const ConeOperator& op, std::span<const double> lam) {
  require_dim(op, lam);
  if (!cone_contains(op.domain(), lam)) {
    throw ConeError(op.name() + ": eigenvalues outside Gamma_" + std::to_string(op.domain().k));
  }
  const int n = op.dim();
  const auto nn = static_cast<std::size_t>(n);
  const auto e = sigma_all(lam);
  OpValue out;
  out.grad.assign(nn, 0.0);

  switch (op.kind()) {
    case OperatorKind::MongeAmpere: {
      double logp = 0.0;
      for (double x : lam) logp += std::log(x);
      out.value = std::exp(logp / n);
      for (std::size_t i = 0; i < nn; ++i) out.grad[i] = out.value / (n * lam[i]);
      break;
    }
    case OperatorKind::SigmaK: {
      const auto k = static_cast<std::size_t>(op.k());
      const double s = e[k];
      out.value = std::pow(s, 1.0 / op.k());
      const double scale = out.value / (op.k() * s);
      for (std::size_t i = 0; i < nn; ++i) {
        out.grad[i] = scale * sigma_all_without(lam, i)[k - 1];
      }
      break;
    }
    case OperatorKind::HessianQuotient: {
      const auto k = static_cast<std::size_t>(op.k());
      const double sn = e[nn];
      const double sk = e[k];
      const double q = sn / sk;
      const double p = 1.0 / (n - op.k());
      out.value = std::pow(q, p);
      for (std::size_t i = 0; i < nn; ++i) {
        const auto r = sigma_all_without(lam, i);
        const double dq = (r[nn - 1] * sk - sn * r[k - 1]) / (sk * sk);
        out.grad[i] = p * out.value / q * dq;
      }
      break;
    }
    case OperatorKind::J: {
      const double sn = e[nn];
      const double sm = e[nn - 1];
      out.value = sn / sm;
      for (std::size_t i = 0; i < nn; ++i) {
        const auto r = sigma_all_without(lam, i);
        const double r_nm2 = nn >= 2 ? r[nn - 2] : 0.0;
        out.grad[i] = (r[nn - 1] * sm - sn * r_nm2) / (sm * sm);
      }
      break;
    }
  }
  return out;
}

OpValue tilde_eval(const ConeOperator& op, std::span<const double> lam_tilde) {
  require_dim(op, lam_tilde);
  EigenTuple lam(lam_tilde.size());
  for (std::size_t i = 0; i < lam.size(); ++i) {
    if (!(lam_tilde[i] > 0.0)) throw DomainError("tilde_eval: non-positive entry in lambda~");
    lam[i] = 1.0 / lam_tilde[i];
  }
  const OpValue f = op_eval(op, lam);
  OpValue out;
  out.value = 1.0 / f.value;
  out.grad.resize(lam.size());
  const double inv_f2 = 1.0 / (f.value * f.value);
  for (std::size_t i = 0; i < lam.size(); ++i) {
    out.grad[i] = f.grad[i] * lam[i] * lam[i] * inv_f2;
  }
  return out;
}

namespace {

EigenTuple along(std::span<const double> base, std::span<const double> dir, double t) {
  EigenTuple p(base.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = base[i] + t * dir[i];
  return p;
}

void check_ray(const ConeOperator& op, std::span<const double> base, std::span<const double> dir) {
  require_dim(op, base);
  require_dim(op, dir);
  bool nonzero = false;
  for (double d : dir) {
    if (d < 0.0) throw DomainError("ray direction must lie in the closed positive orthant");
    nonzero = nonzero || d > 0.0;
  }
  if (!nonzero) throw DomainError("ray direction is zero");
}

}  // namespace

std::optional<double> ray_entry(const ConeOperator& op, std::span<const double> base,
                                std::span<const double> dir, double t_max) {
  check_ray(op, base, dir);
  const ConeId cone = op.domain();
  if (cone_contains(cone, base)) return 0.0;
  if (!cone_contains(cone, along(base, dir, t_max))) return std::nullopt;
  // Gamma + closed positive orthant stays in Gamma, so membership along the
  // ray is a half-line and bisection applies.
  double lo = 0.0, hi = t_max;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cone_contains(cone, along(base, dir, mid))) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::optional<double> boundary_cross(const ConeOperator& op, double level,
                                     std::span<const double> base,
                                     std::span<const double> dir, const RayOptions& opts) {
  if (!(level > 0.0)) throw DomainError("boundary_cross: level must be positive");
  const auto entry = ray_entry(op, base, dir, opts.t_max);
  if (!entry) return std::nullopt;

  auto f_at = [&](double t) { return op_eval(op, along(base, dir, t)).value; };
  const double t_in = *entry;
  const double f_in = f_at(t_in);
  if (std::abs(f_in - level) <= opts.rel_tol * level) return t_in;
  if (f_in > level) {
    throw LevelPassedError("boundary_cross: f = " + std::to_string(f_in) +
                           " already exceeds level " + std::to_string(level) + " at cone entry");
  }

  double lo = t_in;
  double hi = std::max(2.0 * t_in, 1.0);
  while (hi < opts.t_max && f_at(hi) < level) {
    lo = hi;
    hi *= 2.0;
  }
  if (hi >= opts.t_max) {
    hi = opts.t_max;
    if (f_at(hi) < level) return std::nullopt;
  }
  for (int it = 0; it < 400 && hi - lo > opts.rel_tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f_at(mid) < level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

OperatorFunction as_function(const ConeOperator& op) {
  return {op.name(), op.dim(), op.domain(),
          [op](std::span<const double> lam) { return op_eval(op, lam); }};
}

EigenTuple sample_cone_point(int n, ConeId cone, std::mt19937_64& rng) {
  EigenTuple lam(static_cast<std::size_t>(n));
  if (cone.k == n) {
    std::uniform_real_distribution<double> logu(std::log(0.1), std::log(10.0));
    for (auto& x : lam) x = std::exp(logu(rng));
    return lam;
  }
  std::uniform_real_distribution<double> u(-2.0, 10.0);
  for (;;) {
    for (auto& x : lam) x = u(rng);
    if (cone_contains(cone, lam)) return lam;
  }
}

namespace {

OpValue tilde_of(const OperatorFunction& fn, std::span<const double> lt) {
  EigenTuple lam(lt.size());
  for (std::size_t i = 0; i < lt.size(); ++i) lam[i] = 1.0 / lt[i];
  const OpValue f = fn.eval(lam);
  OpValue out{1.0 / f.value, EigenTuple(lt.size())};
  for (std::size_t i = 0; i < lt.size(); ++i) {
    out.grad[i] = f.grad[i] * lam[i] * lam[i] / (f.value * f.value);
  }
  return out;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

StructureReport check_structure(const ConeOperator& op, int sample_count, std::uint64_t seed) {
  return check_structure(as_function(op), sample_count, seed);
}

StructureReport check_structure(const OperatorFunction& fn, int sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw DomainError("check_structure needs at least one sample");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_t(std::log(0.1), std::log(10.0));
  const auto n = static_cast<std::size_t>(fn.n);

  StructureReport rep;
  rep.op_name = fn.name;
  rep.samples = sample_count;
  rep.grad_min = std::numeric_limits<double>::infinity();

  for (int s = 0; s < sample_count; ++s) {
    const EigenTuple lam = sample_cone_point(fn.n, fn.domain, rng);
    const OpValue f = fn.eval(lam);

    // (a) degree-one homogeneity
    const double t = std::exp(log_t(rng));
    EigenTuple scaled(lam);
    for (auto& x : scaled) x *= t;
    rep.homogeneity_max =
        std::max(rep.homogeneity_max, std::abs(fn.eval(scaled).value - t * f.value) / f.value);

    // (b) gradient positivity and agreement with central differences
    const double gnorm = max_abs(f.grad);
    for (std::size_t i = 0; i < n; ++i) {
      rep.grad_min = std::min(rep.grad_min, f.grad[i]);
      const double h = 1e-5 * std::max(1.0, std::abs(lam[i]));
      EigenTuple p(lam), m(lam);
      p[i] += h;
      m[i] -= h;
      const double fd = (fn.eval(p).value - fn.eval(m).value) / (2.0 * h);
      rep.grad_fd_max = std::max(rep.grad_fd_max, std::abs(fd - f.grad[i]) / gnorm);
    }

    // The remaining checks live on the positive orthant where f~ is defined.
    const EigenTuple x = sample_cone_point(fn.n, ConeId{fn.n}, rng);
    const EigenTuple y = sample_cone_point(fn.n, ConeId{fn.n}, rng);
    EigenTuple mid(n);
    for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (x[i] + y[i]);
    const OpValue tx = tilde_of(fn, x);
    const OpValue ty = tilde_of(fn, y);
    const OpValue tm = tilde_of(fn, mid);

    // (c) midpoint concavity of f~
    const double gap = 0.5 * (tx.value + ty.value) - tm.value;
    rep.concavity_max = std::max(rep.concavity_max, gap / tm.value);

    // (d) Euler identity for f~
    double euler = 0.0;
    for (std::size_t i = 0; i < n; ++i) euler += x[i] * tx.grad[i];
    rep.euler_max = std::max(rep.euler_max, std::abs(euler - tx.value) / tx.value);

    // involution: 1 / f~(1/lambda) reproduces f(lambda) with its gradient
    EigenTuple inv(n);
    for (std::size_t i = 0; i < n; ++i) inv[i] = 1.0 / x[i];
    const OpValue tt = tilde_of(fn, inv);
    const OpValue fx = fn.eval(x);
    double inv_err = std::abs(1.0 / tt.value - fx.value) / fx.value;
    const double fx_g = max_abs(fx.grad);
    for (std::size_t i = 0; i < n; ++i) {
      const double back = tt.grad[i] * inv[i] * inv[i] / (tt.value * tt.value);
      inv_err = std::max(inv_err, std::abs(back - fx.grad[i]) / fx_g);
    }
    rep.involution_max = std::max(rep.involution_max, inv_err);
  }
  return rep;
}

}  // namespace linf
