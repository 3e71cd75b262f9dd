#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace wassid {

namespace tol {
inline constexpr double kCovSymmetry = 1e-12;
inline constexpr double kCovPsd = 1e-10;
inline constexpr double kWeightSum = 1e-12;
}  // namespace tol

using PointMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct GaussianMeasure {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  Eigen::Index dim() const { return mean.size(); }
};

// points holds one sample per row (n x d).
struct EmpiricalMeasure {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
};

struct Ar1Config {
  Eigen::MatrixXd a0;
  Eigen::MatrixXd noise_cov;
  Eigen::MatrixXd c1;
  int steps = 2;
};

void validate(const GaussianMeasure& g);
void validate(const EmpiricalMeasure& e);
void validate(const Ar1Config& cfg);

GaussianMeasure gaussian_pushforward_linear(const GaussianMeasure& g,
                                            const Eigen::MatrixXd& a);
EmpiricalMeasure empirical_pushforward(const EmpiricalMeasure& e,
                                       const PointMap& map);
EmpiricalMeasure sample_gaussian(const GaussianMeasure& g, Eigen::Index n,
                                 std::uint64_t seed);
EmpiricalMeasure uniform_grid_1d(Eigen::Index n);
EmpiricalMeasure make_uniform_empirical(const Eigen::MatrixXd& points);

Eigen::MatrixXd ar1_step(const Eigen::MatrixXd& c, const Eigen::MatrixXd& a0,
                         const Eigen::MatrixXd& q);
std::vector<GaussianMeasure> ar1_covariance_sequence(const Ar1Config& cfg);

}  // namespace wassid
