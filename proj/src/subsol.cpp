#include "linf/subsol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "linf/error.hpp"

namespace linf {

nlohmann::json to_json(const SubsolutionCertificate& c) {
  nlohmann::json j{{"kind", c.kind == CertificateKind::DeltaR ? "DeltaR" : "DeltaTilde"},
                   {"operator", c.op_name},
                   {"delta", c.delta},
                   {"threshold", c.threshold},
                   {"worst_node", c.worst_node},
                   {"worst_point", c.worst_point},
                   {"worst_value", c.worst_value},
                   {"pass", c.pass},
                   {"vacuous", c.vacuous}};
  if (c.kind == CertificateKind::DeltaR) {
    j["escaped"] = c.escaped;
    j["approximate"] = true;
    j["sampling"] = {{"direction_count", c.direction_count},
                     {"T_max", c.T_max},
                     {"seed", c.seed},
                     {"node_groups", c.node_groups}};
  }
  return j;
}

double derive_R_tilde(double delta, double kappa2) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!(kappa2 > 0.0)) throw DomainError("kappa2 must be positive");
  return (2.0 - delta) * (1.0 - delta) * kappa2 / delta;
}

std::vector<EigenTuple> sample_directions(int n, int dirs, std::uint64_t seed) {
  if (n < 1 || dirs < 0) throw DomainError("bad direction request");
  std::vector<EigenTuple> out;
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> ex(1.0);
  const auto nn = static_cast<std::size_t>(n);
  for (int d = 0; d < dirs; ++d) {
    EigenTuple mu(nn);
    double s = 0.0;
    for (auto& v : mu) s += (v = ex(rng));
    for (auto& v : mu) v /= s;
    out.push_back(std::move(mu));
  }
  for (double eta : {1e-3, 1e-6}) {
    for (std::size_t i = 0; i < nn; ++i) {
      EigenTuple mu(nn, eta);
      mu[i] = 1.0;
      out.push_back(std::move(mu));
    }
  }
  for (std::size_t i = 0; i < nn; ++i) {
    EigenTuple mu(nn, 0.0);
    mu[i] = 1.0;
    out.push_back(std::move(mu));
  }
  return out;
}

namespace {

void check_shapes(const TorusGrid& grid, const HermitianMetricField& omega,
                  const HermitianMetricField& chi, const ScalarField& F, const ConeOperator& op) {
  if (omega.nodes() != grid.nodes() || chi.nodes() != grid.nodes() || F.size() != grid.nodes() ||
      omega.n() != grid.n() || chi.n() != grid.n()) {
    throw DomainError("field shapes do not match the grid");
  }
  if (op.dim() != grid.n()) throw DomainError("operator dimension differs from the grid");
}

struct Group {
  EigenTuple lam;
  std::vector<std::pair<double, std::int64_t>> levels;  // (e^F, node), sorted
};

}  // namespace

SubsolutionCertificate check_delta_R(const ConeOperator& op, const TorusGrid& grid,
                                     const HermitianMetricField& omega,
                                     const HermitianMetricField& chi_prime, const ScalarField& F,
                                     double delta, double R, int dirs, std::uint64_t seed,
                                     const DeltaROptions& opts) {
  if (!(delta > 0.0) || !(R > 0.0)) throw DomainError("delta and R must be positive");
  check_shapes(grid, omega, chi_prime, F, op);
  const int n = grid.n();
  const Eigen::MatrixXd lam = relative_eigs_field(omega, chi_prime);

  // Group nodes by their chi' eigenvalues; rays depend only on those.
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double q = opts.group_rel * scale;
  std::map<std::vector<long long>, Group> groups;
  for (std::int64_t i = 0; i < grid.nodes(); ++i) {
    std::vector<long long> key(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) key[static_cast<std::size_t>(k)] = std::llround(lam(i, k) / q);
    auto [it, fresh] = groups.try_emplace(std::move(key));
    if (fresh) {
      it->second.lam.resize(static_cast<std::size_t>(n));
      for (int k = 0; k < n; ++k) it->second.lam[static_cast<std::size_t>(k)] = lam(i, k);
    }
    it->second.levels.emplace_back(std::exp(F[i]), i);
  }

  SubsolutionCertificate cert;
  cert.kind = CertificateKind::DeltaR;
  cert.op_name = op.name();
  cert.delta = delta;
  cert.threshold = R;
  cert.T_max = opts.T_max;
  cert.seed = seed;
  cert.node_groups = static_cast<std::int64_t>(groups.size());
  const std::vector<EigenTuple> directions = sample_directions(n, dirs, seed);
  cert.direction_count = static_cast<int>(directions.size());

  const RayOptions ray{opts.T_max, 1e-12};
  bool reached = false;
  double worst = 0.0;
  std::int64_t worst_node = -1;

  for (auto& [key, grp] : groups) {
    std::sort(grp.levels.begin(), grp.levels.end());
    EigenTuple b(grp.lam);
    for (auto& v : b) v -= delta;
    for (const EigenTuple& mu : directions) {
      const auto entry = ray_entry(op, b, mu, opts.T_max);
      if (!entry) continue;
      EigenTuple pe(b);
      for (std::size_t k = 0; k < pe.size(); ++k) pe[k] += *entry * mu[k];
      const double f_entry = op_eval(op, pe).value;
      // Levels below the entry value are never met along this ray.
      auto first = std::lower_bound(grp.levels.begin(), grp.levels.end(),
                                    std::make_pair(f_entry * (1.0 - 1e-12), std::int64_t{-1}));
      if (first == grp.levels.end()) continue;
      // The crossing parameter grows with the level and |b + t mu| is convex
      // in t, so the extreme levels give the largest radius.
      for (const auto* lv : {&*first, &grp.levels.back()}) {
        std::optional<double> t;
        try {
          t = boundary_cross(op, lv->first, b, mu, ray);
        } catch (const LevelPassedError&) {
          continue;
        }
        reached = true;
        if (!t) {
          cert.escaped = true;
          worst = std::numeric_limits<double>::infinity();
          worst_node = lv->second;
          continue;
        }
        double r2 = 0.0;
        for (std::size_t k = 0; k < b.size(); ++k) {
          const double x = b[k] + *t * mu[k];
          r2 += x * x;
        }
        const double r = std::sqrt(r2);
        if (r > worst) {
          worst = r;
          worst_node = lv->second;
        }
      }
    }
  }

  cert.vacuous = !reached;
  cert.worst_value = worst;
  cert.worst_node = worst_node;
  if (worst_node >= 0) cert.worst_point = grid.point(worst_node);
  cert.pass = !cert.escaped && worst <= R;
  return cert;
}

double tilde_gradient_lhs(const ConeOperator& op, std::span<const double> mu) {
  EigenTuple mt(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (!(mu[k] > 0.0)) throw DomainError("chi' is not positive relative to omega");
    mt[k] = 1.0 / mu[k];
  }
  const OpValue tv = tilde_eval(op, mt);
  double total = 0.0;
  for (std::size_t k = 0; k < mt.size(); ++k) total += mt[k] * tv.grad[k];
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mt.size(); ++i) worst = std::max(worst, total - mt[i] * tv.grad[i]);
  return worst;
}

SubsolutionCertificate check_delta_tilde(const ConeOperator& op, const TorusGrid& grid,
                                         const HermitianMetricField& omega,
                                         const HermitianMetricField& chi_prime,
                                         const ScalarField& F, double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("delta must lie in [0, 1)");
  check_shapes(grid, omega, chi_prime, F, op);
  const Eigen::MatrixXd lam = relative_eigs_field(omega, chi_prime);
  SubsolutionCertificate cert;
  cert.kind = CertificateKind::DeltaTilde;
  cert.op_name = op.name();
  cert.delta = delta;
  cert.threshold = 1.0;
  cert.worst_value = -std::numeric_limits<double>::infinity();
  std::map<std::vector<double>, double> cache;
  for (std::int64_t i = 0; i < grid.nodes(); ++i) {
    std::vector<double> mu(lam.cols());
    for (Eigen::Index k = 0; k < lam.cols(); ++k) mu[static_cast<std::size_t>(k)] = lam(i, k);
    auto it = cache.find(mu);
    if (it == cache.end()) it = cache.emplace(mu, tilde_gradient_lhs(op, mu)).first;
    const double ratio = it->second * std::exp(F[i]) / (1.0 - delta);
    if (ratio > cert.worst_value) {
      cert.worst_value = ratio;
      cert.worst_node = i;
    }
  }
  if (cert.worst_node >= 0) cert.worst_point = grid.point(cert.worst_node);
  cert.pass = cert.worst_value <= 1.0;
  return cert;
}

}  // namespace linf
