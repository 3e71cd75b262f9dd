#include "wassid/fit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "wassid/errors.hpp"
#include "wassid/spd.hpp"
#include "wassid/wasserstein.hpp"

namespace wassid {

namespace {

constexpr double kCostClamp = 1e-8;
constexpr double kSupportMass = 1e-15;
constexpr double kMinLineSearchScale = 1e-14;

void check_covs(const std::vector<Eigen::MatrixXd>& covs) {
  if (covs.size() < 2) {
    throw std::invalid_argument("need at least two covariances");
  }
  const Eigen::Index d = covs.front().rows();
  for (const Eigen::MatrixXd& c : covs) {
    if (c.rows() != d || c.cols() != d) {
      throw std::invalid_argument("covariances must share one square shape");
    }
  }
}

void check_descent(const DescentConfig& cfg) {
  if (!(cfg.step > 0.0) || cfg.max_iters < 1 || cfg.grad_tol < 0.0) {
    throw std::invalid_argument("invalid descent configuration");
  }
}

struct EmpiricalEval {
  double cost = 0.0;
  Eigen::VectorXd grad;
  std::vector<std::uint64_t> plan_ids;
};

EmpiricalEval eval_empirical(const BasisModel& model,
                             const std::vector<EmpiricalMeasure>& snapshots,
                             bool want_grad, bool want_ids) {
  if (snapshots.size() < 2) {
    throw std::invalid_argument("need at least two snapshots");
  }
  for (const EmpiricalMeasure& e : snapshots) {
    if (e.dim() != model.family.dim) {
      throw std::invalid_argument("snapshot dimension does not match model");
    }
  }
  EmpiricalEval out;
  out.grad = Eigen::VectorXd::Zero(model.family.n_params);
  const PointMap map = [&model](const Eigen::VectorXd& x) {
    return model.apply(x);
  };
  for (std::size_t i = 0; i + 1 < snapshots.size(); ++i) {
    const EmpiricalMeasure& src = snapshots[i];
    const EmpiricalMeasure& dst = snapshots[i + 1];
    const EmpiricalMeasure push = empirical_pushforward(src, map);
    const Coupling coupling = solve_discrete_ot(push, dst);
    out.cost += coupling.cost;
    if (want_grad && model.family.n_params > 0) {
      for (Eigen::Index j = 0; j < src.size(); ++j) {
        const Eigen::VectorXd residual =
            coupling.plan.row(j).sum() * push.points.row(j).transpose() -
            (coupling.plan.row(j) * dst.points).transpose();
        if (residual.isZero(0.0)) continue;
        const Eigen::MatrixXd y = model.family.y(src.points.row(j).transpose());
        out.grad += 2.0 * (y.transpose() * residual);
      }
    }
    if (want_ids) out.plan_ids.push_back(plan_identity(coupling.plan));
  }
  return out;
}

}  // namespace

const char* to_string(FitStatus status) {
  switch (status) {
    case FitStatus::kConverged:
      return "converged";
    case FitStatus::kMaxIters:
      return "max-iters";
    case FitStatus::kError:
      return "error";
  }
  return "unknown";
}

std::vector<Eigen::MatrixXd> covariances(
    const std::vector<GaussianMeasure>& snapshots) {
  std::vector<Eigen::MatrixXd> covs;
  covs.reserve(snapshots.size());
  for (const GaussianMeasure& g : snapshots) covs.push_back(g.cov);
  return covs;
}

double gaussian_cost(const Eigen::MatrixXd& a,
                     const std::vector<Eigen::MatrixXd>& covs) {
  check_covs(covs);
  if (a.rows() != covs.front().rows() || a.cols() != covs.front().rows()) {
    throw std::invalid_argument("map dimension does not match covariances");
  }
  double f = 0.0;
  for (std::size_t i = 0; i + 1 < covs.size(); ++i) {
    const Eigen::MatrixXd push = symmetrized(a * covs[i] * a.transpose());
    const Eigen::MatrixXd r1 = sqrt_spd(symmetrized(covs[i + 1]));
    const Eigen::MatrixXd cross =
        sqrt_spd(symmetrized(r1 * push * r1.transpose()));
    f += push.trace() + covs[i + 1].trace() - 2.0 * cross.trace();
  }
  if (f < -kCostClamp) {
    throw NumericalError("negative cost beyond round-off");
  }
  return std::max(f, 0.0);
}

Eigen::MatrixXd gaussian_gradient(const Eigen::MatrixXd& a,
                                  const std::vector<Eigen::MatrixXd>& covs) {
  check_covs(covs);
  const Eigen::Index d = covs.front().rows();
  if (a.rows() != d || a.cols() != d) {
    throw std::invalid_argument("map dimension does not match covariances");
  }
  const Eigen::MatrixXd a_inv_t = inverse(a).transpose();
  Eigen::MatrixXd sum_c = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd sum_m = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i + 1 < covs.size(); ++i) {
    sum_c += covs[i];
    const Eigen::MatrixXd push = symmetrized(a * covs[i] * a.transpose());
    sum_m += sqrt_product(symmetrized(covs[i + 1]), push);
  }
  return 2.0 * (a * sum_c - sum_m * a_inv_t);
}

Eigen::MatrixXd average_monge_init(const std::vector<Eigen::MatrixXd>& covs) {
  check_covs(covs);
  const Eigen::Index d = covs.front().rows();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i + 1 < covs.size(); ++i) {
    sum += inverse(covs[i]) * sqrt_product(symmetrized(covs[i]),
                                           symmetrized(covs[i + 1]));
  }
  return sum / static_cast<double>(covs.size() - 1);
}

GaussianFit fit_linear_gaussian(const std::vector<Eigen::MatrixXd>& covs,
                                const DescentConfig& cfg,
                                const Eigen::MatrixXd& a_init) {
  check_covs(covs);
  check_descent(cfg);
  const double step_eff = cfg.step / static_cast<double>(covs.size() - 1);

  GaussianFit out;
  out.a = a_init;
  Eigen::MatrixXd a = a_init;
  for (int iter = 0;; ++iter) {
    double f = 0.0;
    Eigen::MatrixXd g;
    try {
      f = gaussian_cost(a, covs);
      g = gaussian_gradient(a, covs);
      if (!std::isfinite(f) || !g.allFinite()) {
        throw NumericalError("objective or gradient is not finite");
      }
    } catch (const NumericalError& e) {
      out.trace.status = FitStatus::kError;
      out.trace.message = e.what();
      break;
    }
    const double gn = g.norm();
    out.trace.rows.push_back({iter, f, gn, vectorize_row_major(a)});
    out.a = a;
    if (gn < cfg.grad_tol) {
      out.trace.status = FitStatus::kConverged;
      break;
    }
    if (iter == cfg.max_iters) {
      out.trace.status = FitStatus::kMaxIters;
      break;
    }
    double t = step_eff;
    if (cfg.backtracking.enabled) {
      bool accepted = false;
      while (t >= step_eff * kMinLineSearchScale) {
        double f_new = std::numeric_limits<double>::infinity();
        try {
          f_new = gaussian_cost(a - t * g, covs);
        } catch (const NumericalError&) {
        }
        if (f_new <= f - cfg.backtracking.sufficient_decrease * t * gn * gn) {
          accepted = true;
          break;
        }
        t *= cfg.backtracking.shrink;
      }
      if (!accepted) {
        out.trace.status = FitStatus::kError;
        out.trace.message = "line search found no acceptable step";
        break;
      }
    }
    a -= t * g;
  }
  return out;
}

double empirical_cost(const BasisModel& model,
                      const std::vector<EmpiricalMeasure>& snapshots) {
  return eval_empirical(model, snapshots, false, false).cost;
}

Eigen::VectorXd empirical_gradient(const BasisModel& model,
                                   const std::vector<EmpiricalMeasure>& snapshots) {
  return eval_empirical(model, snapshots, true, false).grad;
}

EmpiricalFit fit_basis_empirical(const std::vector<EmpiricalMeasure>& snapshots,
                                 const BasisFamily& family,
                                 const DescentConfig& cfg,
                                 const Eigen::VectorXd& theta_init) {
  check_descent(cfg);
  if (theta_init.size() != family.n_params) {
    throw std::invalid_argument("theta size does not match family");
  }
  const double step_eff =
      cfg.step / static_cast<double>(snapshots.size() < 2 ? 1 : snapshots.size() - 1);

  EmpiricalFit out;
  out.theta = theta_init;
  BasisModel model{family, theta_init};
  for (int iter = 0;; ++iter) {
    EmpiricalEval eval;
    try {
      eval = eval_empirical(model, snapshots, true, cfg.record_plan_ids);
      if (!std::isfinite(eval.cost) || !eval.grad.allFinite()) {
        throw NumericalError("objective or gradient is not finite");
      }
    } catch (const NumericalError& e) {
      out.trace.status = FitStatus::kError;
      out.trace.message = e.what();
      break;
    }
    const double gn = eval.grad.norm();
    out.trace.rows.push_back({iter, eval.cost, gn, model.theta});
    if (cfg.record_plan_ids) out.trace.plan_ids.push_back(eval.plan_ids);
    out.theta = model.theta;
    if (gn < cfg.grad_tol) {
      out.trace.status = FitStatus::kConverged;
      break;
    }
    if (iter == cfg.max_iters) {
      out.trace.status = FitStatus::kMaxIters;
      break;
    }
    double t = step_eff;
    if (cfg.backtracking.enabled) {
      bool accepted = false;
      while (t >= step_eff * kMinLineSearchScale) {
        double f_new = std::numeric_limits<double>::infinity();
        try {
          const BasisModel candidate{family, model.theta - t * eval.grad};
          f_new = eval_empirical(candidate, snapshots, false, false).cost;
        } catch (const NumericalError&) {
        }
        if (f_new <=
            eval.cost - cfg.backtracking.sufficient_decrease * t * gn * gn) {
          accepted = true;
          break;
        }
        t *= cfg.backtracking.shrink;
      }
      if (!accepted) {
        out.trace.status = FitStatus::kError;
        out.trace.message = "line search found no acceptable step";
        break;
      }
    }
    model.theta -= t * eval.grad;
  }
  return out;
}

double pseudo_metric(const EmpiricalMeasure& mu0, const EmpiricalMeasure& mu1,
                     const BasisFamily& family, const DescentConfig& cfg) {
  Eigen::VectorXd theta0;
  try {
    theta0 = identity_theta(family);
  } catch (const std::invalid_argument&) {
    theta0 = Eigen::VectorXd::Zero(family.n_params);
  }
  const EmpiricalFit fit = fit_basis_empirical({mu0, mu1}, family, cfg, theta0);
  if (fit.trace.rows.empty()) {
    throw NumericalError("pseudo-metric fit failed at the initial point: " +
                         fit.trace.message);
  }
  return fit.trace.rows.back().cost;
}

std::uint64_t plan_identity(const Eigen::MatrixXd& plan) {
  std::uint64_t hash = 14695981039346656037ULL;
  const auto mix = [&hash](std::uint64_t value) {
    for (int byte = 0; byte < 8; ++byte) {
      hash ^= (value >> (8 * byte)) & 0xffULL;
      hash *= 1099511628211ULL;
    }
  };
  for (Eigen::Index j = 0; j < plan.rows(); ++j) {
    for (Eigen::Index k = 0; k < plan.cols(); ++k) {
      if (plan(j, k) > kSupportMass) {
        mix(static_cast<std::uint64_t>(j));
        mix(static_cast<std::uint64_t>(k));
      }
    }
  }
  return hash;
}

}  // namespace wassid
