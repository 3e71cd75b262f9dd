#include "wassid/basis.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace wassid {

BasisFamily linear_family(Eigen::Index d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  BasisFamily f;
  f.name = "linear";
  f.dim = d;
  f.n_params = d * d;
  f.y = [d](const Eigen::VectorXd& x) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(d, d * d);
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index k = 0; k < d; ++k) y(j, j * d + k) = x(k);
    }
    return y;
  };
  return f;
}

BasisFamily affine_family(Eigen::Index d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  BasisFamily f;
  f.name = "affine";
  f.dim = d;
  f.n_params = d * d + d;
  f.y = [d](const Eigen::VectorXd& x) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(d, d * d + d);
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index k = 0; k < d; ++k) y(j, j * d + k) = x(k);
      y(j, d * d + j) = 1.0;
    }
    return y;
  };
  return f;
}

BasisFamily shifted_monomials_1d(const std::vector<int>& exponents) {
  if (exponents.empty()) throw std::invalid_argument("need >= 1 exponent");
  for (int p : exponents) {
    if (p < 0) throw std::invalid_argument("exponents must be >= 0");
  }
  BasisFamily f;
  f.name = "shifted-monomials-1d";
  f.dim = 1;
  f.n_params = static_cast<Eigen::Index>(exponents.size());
  f.y = [exponents](const Eigen::VectorXd& x) {
    Eigen::MatrixXd y(1, static_cast<Eigen::Index>(exponents.size()));
    for (std::size_t j = 0; j < exponents.size(); ++j) {
      y(0, static_cast<Eigen::Index>(j)) = std::pow(1.0 - x(0), exponents[j]);
    }
    return y;
  };
  return f;
}

BasisFamily identity_family(Eigen::Index d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  BasisFamily f;
  f.name = "identity";
  f.dim = d;
  f.n_params = 0;
  f.y = [d](const Eigen::VectorXd&) { return Eigen::MatrixXd(d, 0); };
  f.identity_base = true;
  return f;
}

BasisFamily custom_family(std::string name, Eigen::Index d,
                          Eigen::Index n_params,
                          std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> y) {
  if (d < 1 || n_params < 0 || !y) {
    throw std::invalid_argument("invalid custom family");
  }
  BasisFamily f;
  f.name = std::move(name);
  f.dim = d;
  f.n_params = n_params;
  f.y = std::move(y);
  return f;
}

Eigen::VectorXd BasisModel::apply(const Eigen::VectorXd& x) const {
  if (x.size() != family.dim || theta.size() != family.n_params) {
    throw std::invalid_argument("basis model shape mismatch");
  }
  Eigen::VectorXd value = family.y(x) * theta;
  if (family.identity_base) value += x;
  return value;
}

Eigen::VectorXd identity_theta(const BasisFamily& family) {
  if (family.identity_base) return Eigen::VectorXd(0);
  if (family.name == "linear") {
    return vectorize_row_major(
        Eigen::MatrixXd::Identity(family.dim, family.dim));
  }
  if (family.name == "affine") {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(family.n_params);
    theta.head(family.dim * family.dim) = vectorize_row_major(
        Eigen::MatrixXd::Identity(family.dim, family.dim));
    return theta;
  }
  throw std::invalid_argument("family has no known identity parameters: " +
                              family.name);
}

Eigen::VectorXd vectorize_row_major(const Eigen::MatrixXd& a) {
  Eigen::VectorXd theta(a.rows() * a.cols());
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) theta(j * a.cols() + k) = a(j, k);
  }
  return theta;
}

Eigen::MatrixXd matrix_from_theta(const Eigen::VectorXd& theta, Eigen::Index d) {
  if (theta.size() < d * d) {
    throw std::invalid_argument("theta too short for a d x d matrix");
  }
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < d; ++k) a(j, k) = theta(j * d + k);
  }
  return a;
}

}  // namespace wassid
