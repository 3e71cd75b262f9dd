#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace wassid {

// Map family S(x; theta) = base(x) + Y(x) * theta with Y(x) a d x n matrix.
// base(x) is x for the identity-only family and 0 otherwise.
struct BasisFamily {
  std::string name;
  Eigen::Index dim = 0;
  Eigen::Index n_params = 0;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> y;
  bool identity_base = false;
};

BasisFamily linear_family(Eigen::Index d);
BasisFamily affine_family(Eigen::Index d);
BasisFamily shifted_monomials_1d(const std::vector<int>& exponents);
BasisFamily identity_family(Eigen::Index d);
BasisFamily custom_family(std::string name, Eigen::Index d,
                          Eigen::Index n_params,
                          std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> y);

struct BasisModel {
  BasisFamily family;
  Eigen::VectorXd theta;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

// theta such that S(x; theta) = x, for families that contain the identity map.
Eigen::VectorXd identity_theta(const BasisFamily& family);

Eigen::VectorXd vectorize_row_major(const Eigen::MatrixXd& a);
Eigen::MatrixXd matrix_from_theta(const Eigen::VectorXd& theta, Eigen::Index d);

}  // namespace wassid
