#pragma once

// Dense symmetric/SPD kernels behind the Gaussian closed forms: spectral
// decomposition, matrix square roots, inversion, conditioning. Target sizes
// are small (d of a few), so everything is a plain O(d^3) dense computation.

#include <Eigen/Dense>

#include "wassid/errors.hpp"

namespace wassid {

namespace tol {
// Numeric thresholds used across the SPD kernels. Overridable per call.
inline constexpr double kSymmetryRel = 1e-8;     // accepted input asymmetry
inline constexpr double kEigenClampRel = 1e-10;  // negative spectrum clamped above -rel*|lambda|max
inline constexpr double kStrictPdRel = 1e-12;    // lambda_min/lambda_max below this is singular
inline constexpr double kMaxCondition = 1e12;    // inversion refusal threshold
}  // namespace tol

struct SymEig {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // orthogonal; column k pairs with eigenvalue k
};

/// (a + a^T) / 2.
Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a);

/// Spectral decomposition of a symmetric matrix. Rejects inputs whose
/// asymmetry exceeds symmetry_rel relative to the largest entry.
SymEig sym_eig(const Eigen::MatrixXd& s, double symmetry_rel = tol::kSymmetryRel);

/// Symmetric PSD square root. Eigenvalues in [-clamp_rel*|lambda|max, 0) are
/// treated as round-off and clamped to zero; anything below that throws.
Eigen::MatrixXd sqrt_spd(const Eigen::MatrixXd& s, double clamp_rel = tol::kEigenClampRel);

/// Principal square root of the (generally non-symmetric) product c*b, for
/// strictly positive definite c and PSD b, via the congruence form
///   c^{1/2} (c^{1/2} b c^{1/2})^{1/2} c^{-1/2}.
/// The result M satisfies M*M = c*b, and tr(M) = tr((c^{1/2} b c^{1/2})^{1/2}).
Eigen::MatrixXd sqrt_product(const Eigen::MatrixXd& c, const Eigen::MatrixXd& b);

/// 2-norm condition number from singular values; +inf when exactly singular.
double condition_estimate(const Eigen::MatrixXd& a);

/// Matrix inverse guarded by condition_estimate; throws SingularMatrixError
/// (carrying the estimate) at or above max_condition.
Eigen::MatrixXd inverse(const Eigen::MatrixXd& a, double max_condition = tol::kMaxCondition);

}  // namespace wassid
