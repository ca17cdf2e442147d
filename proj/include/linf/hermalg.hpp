#pragma once

// Small dense Hermitian algebra: eigenvalues of chi relative to a metric
// omega, and the sorted-eigenvalue monotonicity test.

#include <complex>
#include <random>

#include <Eigen/Dense>

#include "linf/symfun.hpp"

namespace linf {

using HermMatrix = Eigen::MatrixXcd;

/// max |A - A*| entrywise.
double hermiticity_residual(const HermMatrix& a);

/// Ascending eigenvalues of a Hermitian matrix.
EigenTuple sorted_eigs(const HermMatrix& a);

double min_eigenvalue(const HermMatrix& a);
bool is_positive_definite(const HermMatrix& a);

/// Ascending eigenvalues of omega^{-1/2} chi omega^{-1/2}. Throws DomainError
/// when omega is not positive definite or either argument is not Hermitian.
EigenTuple relative_eigs(const HermMatrix& omega, const HermMatrix& chi);

/// Checks lambda_i(b) >= lambda_i(a) - tol for ascending eigenvalues. Throws
/// PreconditionError when b - a is not positive semidefinite.
bool min_max_monotone_check(const HermMatrix& a, const HermMatrix& b, double tol = 1e-10);

HermMatrix random_hermitian(int n, std::mt19937_64& rng, double scale = 1.0);
HermMatrix random_psd(int n, std::mt19937_64& rng, double scale = 1.0);

}  // namespace linf
