#include "wassid/spd.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace wassid {

namespace {

void require_square(const Eigen::MatrixXd& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw std::invalid_argument(std::string(who) + ": matrix must be square and non-empty, got " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

}  // namespace

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

SymEig sym_eig(const Eigen::MatrixXd& s, double symmetry_rel) {
  require_square(s, "sym_eig");
  const double scale = s.cwiseAbs().maxCoeff();
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (asym > symmetry_rel * (1.0 + scale)) {
    throw std::invalid_argument("sym_eig: input is not symmetric (max asymmetry " +
                                std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrized(s));
  if (solver.info() != Eigen::Success) {
    throw NumericalError("sym_eig: eigendecomposition did not converge");
  }
  return SymEig{solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::MatrixXd sqrt_spd(const Eigen::MatrixXd& s, double clamp_rel) {
  SymEig eig = sym_eig(s);
  const double lmax = eig.eigenvalues.cwiseAbs().maxCoeff();
  Eigen::VectorXd roots(eig.eigenvalues.size());
  for (Eigen::Index k = 0; k < eig.eigenvalues.size(); ++k) {
    const double lambda = eig.eigenvalues(k);
    if (lambda < -clamp_rel * lmax) {
      throw NumericalError("sqrt_spd: eigenvalue " + std::to_string(lambda) +
                           " below the clamp threshold; input is not PSD");
    }
    roots(k) = std::sqrt(std::max(lambda, 0.0));
  }
  return symmetrized(eig.eigenvectors * roots.asDiagonal() * eig.eigenvectors.transpose());
}

Eigen::MatrixXd sqrt_product(const Eigen::MatrixXd& c, const Eigen::MatrixXd& b) {
  require_square(c, "sqrt_product");
  if (b.rows() != c.rows() || b.cols() != c.cols()) {
    throw std::invalid_argument("sqrt_product: dimension mismatch");
  }
  SymEig eig = sym_eig(c);
  const double lmax = eig.eigenvalues.maxCoeff();
  const double lmin = eig.eigenvalues.minCoeff();
  if (!(lmin > tol::kStrictPdRel * lmax)) {
    throw SingularMatrixError("sqrt_product: first factor is numerically singular",
                              lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity());
  }
  const Eigen::VectorXd roots = eig.eigenvalues.cwiseSqrt();
  const Eigen::MatrixXd root = eig.eigenvectors * roots.asDiagonal() * eig.eigenvectors.transpose();
  const Eigen::MatrixXd root_inv =
      eig.eigenvectors * roots.cwiseInverse().asDiagonal() * eig.eigenvectors.transpose();
  const Eigen::MatrixXd inner = sqrt_spd(symmetrized(root * b * root));
  return root * inner * root_inv;
}

double condition_estimate(const Eigen::MatrixXd& a) {
  require_square(a, "condition_estimate");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

Eigen::MatrixXd inverse(const Eigen::MatrixXd& a, double max_condition) {
  const double cond = condition_estimate(a);
  if (!(cond < max_condition)) {
    throw SingularMatrixError(
        "inverse: matrix is near-singular (condition estimate " + std::to_string(cond) + ")", cond);
  }
  return a.partialPivLu().solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
}

}  // namespace wassid
