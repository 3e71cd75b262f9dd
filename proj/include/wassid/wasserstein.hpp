#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wassid/measures.hpp"

namespace wassid {

namespace tol {
inline constexpr double kMarginal = 1e-9;
inline constexpr double kUniformWeight = 1e-12;
inline constexpr double kTraceClamp = 1e-9;
inline constexpr double kReducedCost = 1e-12;
}  // namespace tol

struct Coupling {
  Eigen::MatrixXd plan;
  Eigen::VectorXd source_weights;
  Eigen::VectorXd target_weights;
  double cost = 0.0;
};

struct MongeMap {
  Eigen::MatrixXd t;
  Eigen::VectorXd offset;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    return t * x + offset;
  }
};

void validate(const Coupling& c);

double w2_gaussian(const GaussianMeasure& g0, const GaussianMeasure& g1);
MongeMap monge_map_gaussian(const GaussianMeasure& g0,
                            const GaussianMeasure& g1);

Eigen::MatrixXd squared_distance_matrix(const EmpiricalMeasure& e0,
                                        const EmpiricalMeasure& e1);
Coupling solve_discrete_ot(const EmpiricalMeasure& e0,
                           const EmpiricalMeasure& e1);
double w2_empirical(const EmpiricalMeasure& e0, const EmpiricalMeasure& e1);

namespace detail {

bool is_uniform(const Eigen::VectorXd& w);

// Exact linear assignment by shortest augmenting paths; col assigned per row.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

// Transportation simplex with Bland pivoting; returns the optimal plan.
Eigen::MatrixXd solve_transport_simplex(const Eigen::MatrixXd& cost,
                                        const Eigen::VectorXd& w0,
                                        const Eigen::VectorXd& w1);

// 1-D quantile coupling on sorted points (optimal for convex ground cost).
Eigen::MatrixXd solve_sorted_1d(const EmpiricalMeasure& e0,
                                const EmpiricalMeasure& e1);

}  // namespace detail

}  // namespace wassid
