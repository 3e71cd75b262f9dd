#include "wassid/measures.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "wassid/errors.hpp"
#include "wassid/spd.hpp"

namespace wassid {

namespace {

void check_cov_matrix(const Eigen::MatrixXd& cov, const char* label) {
  if (cov.rows() != cov.cols() || cov.rows() < 1) {
    throw std::invalid_argument(std::string(label) + " must be a square matrix");
  }
  const double scale = 1.0 + cov.cwiseAbs().maxCoeff();
  const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol::kCovSymmetry * scale) {
    throw std::invalid_argument(std::string(label) + " is not symmetric");
  }
  const SymEig eig = sym_eig(symmetrized(cov));
  const double lmin = eig.eigenvalues.minCoeff();
  const double lmax = eig.eigenvalues.maxCoeff();
  if (lmin < -tol::kCovPsd * lmax) {
    throw std::invalid_argument(std::string(label) +
                                " is not positive semidefinite");
  }
}

}  // namespace

void validate(const GaussianMeasure& g) {
  if (g.mean.size() < 1) {
    throw std::invalid_argument("gaussian measure needs dimension >= 1");
  }
  if (g.cov.rows() != g.mean.size() || g.cov.cols() != g.mean.size()) {
    throw std::invalid_argument("gaussian covariance shape mismatch");
  }
  check_cov_matrix(g.cov, "covariance");
}

void validate(const EmpiricalMeasure& e) {
  if (e.size() < 1 || e.dim() < 1) {
    throw std::invalid_argument("empirical measure needs n >= 1 points, d >= 1");
  }
  if (e.weights.size() != e.size()) {
    throw std::invalid_argument("weight count does not match point count");
  }
  if ((e.weights.array() < 0.0).any()) {
    throw std::invalid_argument("weights must be nonnegative");
  }
  if (std::abs(e.weights.sum() - 1.0) > tol::kWeightSum) {
    throw std::invalid_argument("weights must sum to 1");
  }
  if (!e.points.allFinite()) {
    throw std::invalid_argument("points must be finite");
  }
}

void validate(const Ar1Config& cfg) {
  const Eigen::Index d = cfg.a0.rows();
  if (d < 1 || cfg.a0.cols() != d) {
    throw std::invalid_argument("a0 must be a square matrix");
  }
  if (cfg.noise_cov.rows() != d || cfg.noise_cov.cols() != d ||
      cfg.c1.rows() != d || cfg.c1.cols() != d) {
    throw std::invalid_argument("ar1 matrices must share the dimension of a0");
  }
  check_cov_matrix(cfg.noise_cov, "noise covariance");
  check_cov_matrix(cfg.c1, "initial covariance");
  if (cfg.steps < 2) {
    throw std::invalid_argument("ar1 sequence needs steps >= 2");
  }
}

GaussianMeasure gaussian_pushforward_linear(const GaussianMeasure& g,
                                            const Eigen::MatrixXd& a) {
  if (a.rows() != g.dim() || a.cols() != g.dim()) {
    throw std::invalid_argument("map dimension does not match measure");
  }
  GaussianMeasure out;
  out.mean = a * g.mean;
  out.cov = symmetrized(a * g.cov * a.transpose());
  return out;
}

EmpiricalMeasure empirical_pushforward(const EmpiricalMeasure& e,
                                       const PointMap& map) {
  EmpiricalMeasure out;
  out.weights = e.weights;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const Eigen::VectorXd image = map(e.points.row(i).transpose());
    if (i == 0) {
      out.points.resize(e.size(), image.size());
    } else if (image.size() != out.points.cols()) {
      throw std::invalid_argument("map changed dimension between points");
    }
    if (!image.allFinite()) {
      throw NumericalError("pushforward produced a non-finite point");
    }
    out.points.row(i) = image.transpose();
  }
  return out;
}

EmpiricalMeasure sample_gaussian(const GaussianMeasure& g, Eigen::Index n,
                                 std::uint64_t seed) {
  validate(g);
  if (n < 1) {
    throw std::invalid_argument("sample count must be >= 1");
  }
  const Eigen::MatrixXd root = sqrt_spd(symmetrized(g.cov));
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  EmpiricalMeasure out;
  out.points.resize(n, g.dim());
  Eigen::VectorXd z(g.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < g.dim(); ++j) z(j) = normal(gen);
    out.points.row(i) = (g.mean + root * z).transpose();
  }
  out.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return out;
}

EmpiricalMeasure uniform_grid_1d(Eigen::Index n) {
  if (n < 1) {
    throw std::invalid_argument("grid size must be >= 1");
  }
  EmpiricalMeasure out;
  out.points.resize(n, 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.points(k, 0) = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
  }
  out.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return out;
}

EmpiricalMeasure make_uniform_empirical(const Eigen::MatrixXd& points) {
  EmpiricalMeasure out;
  out.points = points;
  out.weights = Eigen::VectorXd::Constant(
      points.rows(), 1.0 / static_cast<double>(points.rows()));
  return out;
}

Eigen::MatrixXd ar1_step(const Eigen::MatrixXd& c, const Eigen::MatrixXd& a0,
                         const Eigen::MatrixXd& q) {
  return symmetrized(a0 * c * a0.transpose()) + q;
}

std::vector<GaussianMeasure> ar1_covariance_sequence(const Ar1Config& cfg) {
  validate(cfg);
  const Eigen::Index d = cfg.a0.rows();
  std::vector<GaussianMeasure> out;
  out.reserve(cfg.steps);
  GaussianMeasure g{Eigen::VectorXd::Zero(d), symmetrized(cfg.c1)};
  out.push_back(g);
  for (int k = 1; k < cfg.steps; ++k) {
    g.cov = ar1_step(g.cov, cfg.a0, cfg.noise_cov);
    out.push_back(g);
  }
  return out;
}

}  // namespace wassid
