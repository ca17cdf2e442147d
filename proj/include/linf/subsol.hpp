#pragma once

// Subsolution certificates: the (delta, R) cone-slice condition by ray
// sampling, and the f~ gradient condition.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "linf/symfun.hpp"
#include "linf/torus.hpp"

namespace linf {

enum class CertificateKind { DeltaR, DeltaTilde };

struct SubsolutionCertificate {
  CertificateKind kind = CertificateKind::DeltaR;
  std::string op_name;
  double delta = 0.0;
  /// R for DeltaR, 1 for the DeltaTilde ratio.
  double threshold = 0.0;
  std::int64_t worst_node = -1;
  std::vector<double> worst_point;
  double worst_value = 0.0;
  bool pass = false;
  /// No sampled ray met the level set anywhere (empty intersection).
  bool vacuous = false;
  /// Some ray stayed below the level up to T_max (unbounded slice).
  bool escaped = false;
  // DeltaR sampling record; the certificate is approximate.
  int direction_count = 0;
  double T_max = 0.0;
  std::uint64_t seed = 0;
  std::int64_t node_groups = 0;
};

nlohmann::json to_json(const SubsolutionCertificate& c);

struct DeltaROptions {
  int directions = 512;
  double T_max = 1e6;
  /// Nodes whose chi' eigenvalues agree to this relative precision share rays.
  double group_rel = 1e-12;
};

SubsolutionCertificate check_delta_R(const ConeOperator& op, const TorusGrid& grid,
                                     const HermitianMetricField& omega,
                                     const HermitianMetricField& chi_prime, const ScalarField& F,
                                     double delta, double R, int dirs, std::uint64_t seed,
                                     const DeltaROptions& opts = {});

/// Ray directions used by check_delta_R: `dirs` uniform simplex samples, two
/// near-axis directions per axis and the axes themselves.
std::vector<EigenTuple> sample_directions(int n, int dirs, std::uint64_t seed);

SubsolutionCertificate check_delta_tilde(const ConeOperator& op, const TorusGrid& grid,
                                         const HermitianMetricField& omega,
                                         const HermitianMetricField& chi_prime,
                                         const ScalarField& F, double delta);

/// max_i sum_{j != i} mu~_j df~/dmu~_j at one eigenvalue tuple mu (all > 0).
double tilde_gradient_lhs(const ConeOperator& op, std::span<const double> mu);

/// (2 - delta)(1 - delta) kappa2 / delta.
double derive_R_tilde(double delta, double kappa2);

}  // namespace linf
