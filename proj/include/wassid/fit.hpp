#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "wassid/basis.hpp"
#include "wassid/measures.hpp"

namespace wassid {

enum class FitStatus { kConverged, kMaxIters, kError };

const char* to_string(FitStatus status);

struct TraceRow {
  int iter = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  Eigen::VectorXd params;
};

struct Backtracking {
  bool enabled = false;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
};

struct DescentConfig {
  double step = 0.1;
  int max_iters = 500;
  double grad_tol = 1e-6;
  Backtracking backtracking;
  std::uint64_t seed = 0;
  bool record_plan_ids = false;
};

struct FitTrace {
  std::vector<TraceRow> rows;
  FitStatus status = FitStatus::kMaxIters;
  std::string message;
  // One entry per recorded iteration (one id per snapshot pair), when
  // record_plan_ids is set on an empirical fit.
  std::vector<std::vector<std::uint64_t>> plan_ids;
};

std::vector<Eigen::MatrixXd> covariances(
    const std::vector<GaussianMeasure>& snapshots);

double gaussian_cost(const Eigen::MatrixXd& a,
                     const std::vector<Eigen::MatrixXd>& covs);
Eigen::MatrixXd gaussian_gradient(const Eigen::MatrixXd& a,
                                  const std::vector<Eigen::MatrixXd>& covs);

// Mean of the pairwise Gaussian Monge maps; the alternative initializer.
Eigen::MatrixXd average_monge_init(const std::vector<Eigen::MatrixXd>& covs);

struct GaussianFit {
  Eigen::MatrixXd a;
  FitTrace trace;
};
GaussianFit fit_linear_gaussian(const std::vector<Eigen::MatrixXd>& covs,
                                const DescentConfig& cfg,
                                const Eigen::MatrixXd& a_init);

double empirical_cost(const BasisModel& model,
                      const std::vector<EmpiricalMeasure>& snapshots);
Eigen::VectorXd empirical_gradient(const BasisModel& model,
                                   const std::vector<EmpiricalMeasure>& snapshots);

struct EmpiricalFit {
  Eigen::VectorXd theta;
  FitTrace trace;
};
EmpiricalFit fit_basis_empirical(const std::vector<EmpiricalMeasure>& snapshots,
                                 const BasisFamily& family,
                                 const DescentConfig& cfg,
                                 const Eigen::VectorXd& theta_init);

// inf over the family of W2^2(S#mu0, mu1), computed as a two-snapshot fit.
double pseudo_metric(const EmpiricalMeasure& mu0, const EmpiricalMeasure& mu1,
                     const BasisFamily& family, const DescentConfig& cfg);

// Order-sensitive hash of a plan's support; labels which coupling was used.
std::uint64_t plan_identity(const Eigen::MatrixXd& plan);

}  // namespace wassid
