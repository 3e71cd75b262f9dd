#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "wassid/baselines.hpp"
#include "wassid/basis.hpp"
#include "wassid/errors.hpp"
#include "wassid/fit.hpp"
#include "wassid/measures.hpp"
#include "wassid/spd.hpp"
#include "wassid/wasserstein.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace wassid;

namespace {

MatrixXd benchmark_a0() {
  MatrixXd a(2, 2);
  a << -0.5, 2.0, -1.0, 1.5;
  return a;
}

Ar1Config benchmark_config() {
  return {benchmark_a0(), 0.16 * MatrixXd::Identity(2, 2),
          MatrixXd::Identity(2, 2), 6};
}

std::vector<MatrixXd> benchmark_covs() {
  return covariances(ar1_covariance_sequence(benchmark_config()));
}

const PointMap kCubic = [](const VectorXd& x) {
  const double u = 1.0 - x(0);
  VectorXd out(1);
  out(0) = 0.7 + 0.6 * u - 0.8 * u * u * u;
  return out;
};

std::vector<EmpiricalMeasure> dirac_trajectory(const MatrixXd& a0,
                                               const VectorXd& x1, int m) {
  std::vector<EmpiricalMeasure> snaps;
  VectorXd x = x1;
  for (int i = 0; i < m; ++i) {
    snaps.push_back({x.transpose(), VectorXd::Ones(1)});
    x = a0 * x;
  }
  return snaps;
}

double gaussian_fd_error(const MatrixXd& a, const std::vector<MatrixXd>& covs,
                         double h) {
  const Eigen::Index d = a.rows();
  const MatrixXd grad = gaussian_gradient(a, covs);
  const VectorXd fd = oracles::central_fd(
      [&](const VectorXd& theta) {
        return gaussian_cost(matrix_from_theta(theta, d), covs);
      },
      vectorize_row_major(a), h);
  const MatrixXd fd_mat = matrix_from_theta(fd, d);
  const double scale = std::max(1.0, fd_mat.cwiseAbs().maxCoeff());
  return (grad - fd_mat).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("gaussian_cost trivial cases") {
  std::mt19937_64 rng(101);
  const MatrixXd c = oracles::random_spd(2, 100.0, rng);
  CHECK(gaussian_cost(MatrixXd::Identity(2, 2), {c, c}) <= 1e-12);

  const std::vector<MatrixXd> pair{MatrixXd::Identity(2, 2),
                                   4.0 * MatrixXd::Identity(2, 2)};
  CHECK(gaussian_cost(MatrixXd::Identity(2, 2), pair) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("gaussian_cost vanishes on a noise-free generative sequence") {
  const std::vector<MatrixXd> covs = covariances(ar1_covariance_sequence(
      {benchmark_a0(), MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2), 4}));
  CHECK(gaussian_cost(benchmark_a0(), covs) <= 1e-10);
  CHECK(gaussian_gradient(benchmark_a0(), covs).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("gaussian_cost rejects bad shapes") {
  const MatrixXd i2 = MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(gaussian_cost(i2, {i2}), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_cost(MatrixXd::Identity(3, 3), {i2, i2}),
                  std::invalid_argument);
}

TEST_CASE("gaussian_gradient commuting hand case") {
  const std::vector<MatrixXd> pair{MatrixXd::Identity(2, 2),
                                   4.0 * MatrixXd::Identity(2, 2)};
  const MatrixXd grad = gaussian_gradient(MatrixXd::Identity(2, 2), pair);
  CHECK((grad + 2.0 * MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <=
        1e-10);
}

TEST_CASE("gaussian_gradient matches central differences") {
  std::mt19937_64 rng(103);
  for (const Eigen::Index d : {1, 2, 3}) {
    for (int trial = 0; trial < 8; ++trial) {
      const int m = 2 + trial % 5;
      std::vector<MatrixXd> covs;
      for (int i = 0; i < m; ++i) covs.push_back(oracles::random_spd(d, 100.0, rng));
      const MatrixXd a = oracles::random_nonsingular(d, rng);
      CHECK(gaussian_fd_error(a, covs, 1e-5) <= 1e-5);
    }
  }
}

TEST_CASE("gaussian_gradient rejects near-singular arguments") {
  MatrixXd a(2, 2);
  a << 1.0, 0.0, 0.0, 1e-13;
  CHECK_THROWS_AS(gaussian_gradient(a, benchmark_covs()),
                  SingularMatrixError);
}

TEST_CASE("benchmark sequence summary statistics") {
  const std::vector<MatrixXd> covs = benchmark_covs();
  REQUIRE(covs.size() == 6);
  double trace_sum = 0.0;
  for (std::size_t i = 0; i + 1 < covs.size(); ++i) trace_sum += covs[i].trace();
  CHECK(trace_sum == doctest::Approx(46.1315625).epsilon(1e-12));
  CHECK(gaussian_cost(benchmark_a0(), covs) ==
        doctest::Approx(0.050451762376086506).epsilon(1e-9));
}

TEST_CASE("average_monge_init equals the single-pair map for m=2") {
  std::mt19937_64 rng(107);
  const MatrixXd c0 = oracles::random_spd(2, 50.0, rng);
  const MatrixXd c1 = oracles::random_spd(2, 50.0, rng);
  const MatrixXd init = average_monge_init({c0, c1});
  const MongeMap map =
      monge_map_gaussian({VectorXd::Zero(2), c0}, {VectorXd::Zero(2), c1});
  CHECK((init - map.t).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("average_monge_init on the benchmark sequence") {
  const MatrixXd init = average_monge_init(benchmark_covs());
  MatrixXd want(2, 2);
  want << 1.407413, 0.146142, 0.146142, 1.300951;
  CHECK((init - want).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("fit_linear_gaussian reproduces the benchmark descent") {
  const std::vector<MatrixXd> covs = benchmark_covs();
  DescentConfig cfg;
  cfg.step = 0.1;
  cfg.max_iters = 400;
  cfg.grad_tol = 1e-6;
  const GaussianFit fit =
      fit_linear_gaussian(covs, cfg, MatrixXd::Identity(2, 2));
  REQUIRE(fit.trace.rows.size() >= 9);
  for (int n = 1; n <= 8; ++n) {
    CHECK(fit.trace.rows[std::size_t(n)].cost <
          fit.trace.rows[std::size_t(n - 1)].cost);
  }
  CHECK(fit.trace.rows.back().cost <= gaussian_cost(benchmark_a0(), covs));
  for (std::size_t i = 0; i + 1 < fit.trace.rows.size(); ++i) {
    CHECK(fit.trace.rows[i].iter + 1 == fit.trace.rows[i + 1].iter);
    CHECK(std::isfinite(fit.trace.rows[i].cost));
  }
}

TEST_CASE("fit_linear_gaussian converges immediately at a noise-free truth") {
  const std::vector<MatrixXd> covs = covariances(ar1_covariance_sequence(
      {benchmark_a0(), MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2), 4}));
  DescentConfig cfg;
  cfg.grad_tol = 1e-6;
  const GaussianFit fit = fit_linear_gaussian(covs, cfg, benchmark_a0());
  CHECK(fit.trace.status == FitStatus::kConverged);
  CHECK(fit.trace.rows.size() == 1);
  CHECK(fit.trace.rows[0].grad_norm <= 1e-6);
  CHECK((fit.a - benchmark_a0()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fit_linear_gaussian reaches the same objective from both inits") {
  const std::vector<MatrixXd> covs = benchmark_covs();
  DescentConfig cfg;
  cfg.step = 0.1;
  cfg.max_iters = 4000;
  cfg.grad_tol = 1e-8;
  const GaussianFit from_identity =
      fit_linear_gaussian(covs, cfg, MatrixXd::Identity(2, 2));
  const GaussianFit from_average =
      fit_linear_gaussian(covs, cfg, average_monge_init(covs));
  CHECK(std::abs(from_identity.trace.rows.back().cost -
                 from_average.trace.rows.back().cost) <= 1e-6);
}

TEST_CASE("fit_linear_gaussian with backtracking is non-increasing") {
  DescentConfig cfg;
  cfg.step = 0.5;
  cfg.max_iters = 60;
  cfg.grad_tol = 1e-10;
  cfg.backtracking.enabled = true;
  const GaussianFit fit = fit_linear_gaussian(benchmark_covs(), cfg,
                                              MatrixXd::Identity(2, 2));
  for (std::size_t i = 0; i + 1 < fit.trace.rows.size(); ++i) {
    CHECK(fit.trace.rows[i + 1].cost <= fit.trace.rows[i].cost);
  }
}

TEST_CASE("fit_linear_gaussian reports an error on singular initialization") {
  MatrixXd bad(2, 2);
  bad << 1.0, 0.0, 0.0, 1e-13;
  DescentConfig cfg;
  const GaussianFit fit = fit_linear_gaussian(benchmark_covs(), cfg, bad);
  CHECK(fit.trace.status == FitStatus::kError);
  CHECK(!fit.trace.message.empty());
}

TEST_CASE("fit_linear_gaussian is deterministic") {
  DescentConfig cfg;
  cfg.max_iters = 40;
  const GaussianFit a = fit_linear_gaussian(benchmark_covs(), cfg,
                                            MatrixXd::Identity(2, 2));
  const GaussianFit b = fit_linear_gaussian(benchmark_covs(), cfg,
                                            MatrixXd::Identity(2, 2));
  REQUIRE(a.trace.rows.size() == b.trace.rows.size());
  for (std::size_t i = 0; i < a.trace.rows.size(); ++i) {
    CHECK(a.trace.rows[i].cost == b.trace.rows[i].cost);
    CHECK(a.trace.rows[i].params == b.trace.rows[i].params);
  }
}

TEST_CASE("empirical_cost trivial cases") {
  std::mt19937_64 rng(109);
  const EmpiricalMeasure e = oracles::random_cloud(12, 2, rng);
  const BasisModel identity{linear_family(2),
                            identity_theta(linear_family(2))};
  CHECK(empirical_cost(identity, {e, e}) <= 1e-12);

  VectorXd x1(2), x2(2);
  x1 << 1.0, -0.5;
  x2 << 0.25, 2.0;
  MatrixXd a(2, 2);
  a << 0.5, 1.0, -1.0, 0.0;
  const BasisModel linear{linear_family(2), vectorize_row_major(a)};
  const std::vector<EmpiricalMeasure> diracs{
      {x1.transpose(), VectorXd::Ones(1)}, {x2.transpose(), VectorXd::Ones(1)}};
  CHECK(empirical_cost(linear, diracs) ==
        doctest::Approx((a * x1 - x2).squaredNorm()).epsilon(1e-12));
}

TEST_CASE("empirical_cost vanishes at the cubic truth") {
  const EmpiricalMeasure grid = uniform_grid_1d(100);
  const std::vector<EmpiricalMeasure> snaps{grid,
                                            empirical_pushforward(grid, kCubic)};
  VectorXd truth(3);
  truth << -0.8, 0.6, 0.7;
  const BasisModel model{shifted_monomials_1d({3, 1, 0}), truth};
  CHECK(empirical_cost(model, snaps) <= 1e-12);
  CHECK(empirical_gradient(model, snaps).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("empirical_cost requires at least two snapshots") {
  const EmpiricalMeasure grid = uniform_grid_1d(4);
  const BasisModel model{identity_family(1), VectorXd()};
  CHECK_THROWS_AS(empirical_cost(model, {grid}), std::invalid_argument);
}

TEST_CASE("empirical_gradient on a Dirac pair is the rank-one formula") {
  VectorXd x1(2), x2(2);
  x1 << 0.8, -1.2;
  x2 << -0.3, 0.4;
  MatrixXd a(2, 2);
  a << 1.5, 0.25, -0.75, 2.0;
  const BasisModel model{linear_family(2), vectorize_row_major(a)};
  const std::vector<EmpiricalMeasure> diracs{
      {x1.transpose(), VectorXd::Ones(1)}, {x2.transpose(), VectorXd::Ones(1)}};
  const VectorXd grad = empirical_gradient(model, diracs);
  const MatrixXd want = 2.0 * (a * x1 - x2) * x1.transpose();
  CHECK((matrix_from_theta(grad, 2) - want).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("empirical_gradient matches central differences at stable plans") {
  std::mt19937_64 rng(113);
  int tested = 0;
  for (int trial = 0; trial < 30 && tested < 12; ++trial) {
    const Eigen::Index d = 1 + Eigen::Index(trial % 2);
    const Eigen::Index n = 5 + Eigen::Index(trial % 3) * 5;
    const BasisFamily family =
        (d == 1 && trial % 4 == 0) ? shifted_monomials_1d({3, 1, 0})
                                   : linear_family(d);
    VectorXd theta = family.name == "linear"
                         ? VectorXd(identity_theta(family))
                         : VectorXd(oracles::random_vector(family.n_params, rng));
    theta += 0.3 * oracles::random_vector(family.n_params, rng);
    const BasisModel model{family, theta};
    std::vector<EmpiricalMeasure> snaps;
    for (int i = 0; i < 3; ++i) snaps.push_back(oracles::random_cloud(n, d, rng));

    const double h = 1e-6;
    const auto plan_ids = [&](const VectorXd& th) {
      std::vector<std::uint64_t> ids;
      for (std::size_t i = 0; i + 1 < snaps.size(); ++i) {
        const BasisModel probe{family, th};
        const EmpiricalMeasure pushed = empirical_pushforward(
            snaps[i], [&](const VectorXd& x) { return probe.apply(x); });
        ids.push_back(plan_identity(solve_discrete_ot(pushed, snaps[i + 1]).plan));
      }
      return ids;
    };
    const std::vector<std::uint64_t> base = plan_ids(theta);
    bool stable = true;
    for (Eigen::Index k = 0; k < theta.size() && stable; ++k) {
      VectorXd lo = theta, hi = theta;
      lo(k) -= h;
      hi(k) += h;
      stable = plan_ids(lo) == base && plan_ids(hi) == base;
    }
    if (!stable) continue;
    ++tested;

    const VectorXd grad = empirical_gradient(model, snaps);
    const VectorXd fd = oracles::central_fd(
        [&](const VectorXd& th) {
          return empirical_cost({family, th}, snaps);
        },
        theta, h);
    const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
    CHECK((grad - fd).cwiseAbs().maxCoeff() / scale <= 1e-4);
  }
  CHECK(tested >= 10);
}

TEST_CASE("fit_basis_empirical converges immediately at the truth") {
  const EmpiricalMeasure grid = uniform_grid_1d(50);
  const std::vector<EmpiricalMeasure> snaps{grid,
                                            empirical_pushforward(grid, kCubic)};
  VectorXd truth(3);
  truth << -0.8, 0.6, 0.7;
  DescentConfig cfg;
  const EmpiricalFit fit =
      fit_basis_empirical(snaps, shifted_monomials_1d({3, 1, 0}), cfg, truth);
  CHECK(fit.trace.status == FitStatus::kConverged);
  CHECK(fit.trace.rows.size() == 1);
  CHECK(fit.trace.rows[0].grad_norm <= cfg.grad_tol);
}

TEST_CASE("fit_basis_empirical recovers the cubic coefficients") {
  const EmpiricalMeasure grid = uniform_grid_1d(100);
  const std::vector<EmpiricalMeasure> snaps{grid,
                                            empirical_pushforward(grid, kCubic)};
  VectorXd init(3);
  init << -2.0, 0.0, 2.0;
  DescentConfig cfg;
  cfg.step = 0.1;
  cfg.max_iters = 20000;
  cfg.grad_tol = 1e-10;
  const EmpiricalFit fit =
      fit_basis_empirical(snaps, shifted_monomials_1d({3, 1, 0}), cfg, init);
  VectorXd truth(3);
  truth << -0.8, 0.6, 0.7;
  CHECK((fit.theta - truth).cwiseAbs().maxCoeff() <= 0.05);
  CHECK(fit.trace.rows.back().cost < fit.trace.rows.front().cost);
}

TEST_CASE("all-Dirac linear fit agrees with least-squares dynamics") {
  std::mt19937_64 rng(127);
  MatrixXd a0(2, 2);
  a0 << 0.8, -0.3, 0.25, 0.7;
  VectorXd x1(2);
  x1 << 1.0, 1.0;
  const std::vector<EmpiricalMeasure> snaps = dirac_trajectory(a0, x1, 10);

  std::vector<VectorXd> traj;
  for (const EmpiricalMeasure& s : snaps) traj.push_back(s.points.row(0).transpose());
  const MatrixXd dmd = dmd_least_squares(traj);
  CHECK((dmd - a0).cwiseAbs().maxCoeff() <= 1e-8);

  const BasisModel at_dmd{linear_family(2), vectorize_row_major(dmd)};
  CHECK(empirical_gradient(at_dmd, snaps).norm() <= 1e-8);

  DescentConfig cfg;
  cfg.step = 0.2;
  cfg.max_iters = 20000;
  cfg.grad_tol = 1e-12;
  const EmpiricalFit fit = fit_basis_empirical(
      snaps, linear_family(2), cfg, identity_theta(linear_family(2)));
  CHECK((matrix_from_theta(fit.theta, 2) - dmd).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("fit_basis_empirical records plan identities when asked") {
  const EmpiricalMeasure grid = uniform_grid_1d(20);
  const std::vector<EmpiricalMeasure> snaps{
      grid, empirical_pushforward(grid, kCubic),
      empirical_pushforward(empirical_pushforward(grid, kCubic), kCubic)};
  VectorXd init(3);
  init << -1.0, 0.5, 0.6;
  DescentConfig cfg;
  cfg.max_iters = 5;
  cfg.record_plan_ids = true;
  const EmpiricalFit fit =
      fit_basis_empirical(snaps, shifted_monomials_1d({3, 1, 0}), cfg, init);
  REQUIRE(fit.trace.plan_ids.size() == fit.trace.rows.size());
  for (const auto& ids : fit.trace.plan_ids) CHECK(ids.size() == 2);
}

TEST_CASE("fit_basis_empirical is deterministic") {
  const EmpiricalMeasure grid = uniform_grid_1d(30);
  const std::vector<EmpiricalMeasure> snaps{grid,
                                            empirical_pushforward(grid, kCubic)};
  VectorXd init(3);
  init << -2.0, 0.0, 2.0;
  DescentConfig cfg;
  cfg.max_iters = 50;
  const EmpiricalFit a =
      fit_basis_empirical(snaps, shifted_monomials_1d({3, 1, 0}), cfg, init);
  const EmpiricalFit b =
      fit_basis_empirical(snaps, shifted_monomials_1d({3, 1, 0}), cfg, init);
  REQUIRE(a.trace.rows.size() == b.trace.rows.size());
  for (std::size_t i = 0; i < a.trace.rows.size(); ++i) {
    CHECK(a.trace.rows[i].params == b.trace.rows[i].params);
  }
}

TEST_CASE("fit_basis_empirical flags model blow-up as an error") {
  const EmpiricalMeasure grid = uniform_grid_1d(8);
  const std::vector<EmpiricalMeasure> snaps{grid, grid};
  const BasisFamily family = custom_family(
      "explode", 1, 1, [](const VectorXd& x) {
        return MatrixXd::Constant(1, 1, 1.0 / (x(0) - x(0)));
      });
  DescentConfig cfg;
  const EmpiricalFit fit =
      fit_basis_empirical(snaps, family, cfg, VectorXd::Ones(1));
  CHECK(fit.trace.status == FitStatus::kError);
  CHECK(!fit.trace.message.empty());
}

TEST_CASE("pseudo_metric with the identity family is the squared distance") {
  std::mt19937_64 rng(131);
  const EmpiricalMeasure e0 = oracles::random_cloud(15, 2, rng);
  const EmpiricalMeasure e1 = oracles::random_cloud(15, 2, rng);
  DescentConfig cfg;
  const double got = pseudo_metric(e0, e1, identity_family(2), cfg);
  const double w2 = w2_empirical(e0, e1);
  CHECK(got == doctest::Approx(w2 * w2).epsilon(1e-12));
}

TEST_CASE("pseudo_metric vanishes when the family contains the truth") {
  const EmpiricalMeasure grid = uniform_grid_1d(24);
  const EmpiricalMeasure scaled = empirical_pushforward(
      grid, [](const VectorXd& x) { return VectorXd(0.5 * x); });
  DescentConfig cfg;
  cfg.step = 0.3;
  cfg.max_iters = 2000;
  cfg.grad_tol = 1e-12;
  CHECK(pseudo_metric(grid, scaled, linear_family(1), cfg) <= 1e-10);
}

TEST_CASE("pseudo_metric on mapped planar samples finds the matching map") {
  std::mt19937_64 rng(137);
  const MatrixXd c0 = oracles::random_spd(2, 10.0, rng);
  const MatrixXd c1 = oracles::random_spd(2, 10.0, rng);
  const MongeMap map =
      monge_map_gaussian({VectorXd::Zero(2), c0}, {VectorXd::Zero(2), c1});
  const EmpiricalMeasure e0 = sample_gaussian({VectorXd::Zero(2), c0}, 60, 5);
  const EmpiricalMeasure e1 = empirical_pushforward(
      e0, [&](const VectorXd& x) { return map.apply(x); });
  DescentConfig cfg;
  cfg.step = 0.1;
  cfg.max_iters = 4000;
  cfg.grad_tol = 1e-10;
  cfg.backtracking.enabled = true;
  const double got = pseudo_metric(e0, e1, linear_family(2), cfg);
  CHECK(got <= 1e-8);
  const double w2 = w2_empirical(e0, e1);
  CHECK(got <= w2 * w2 + 1e-9);
}

TEST_CASE("plan_identity separates distinct supports") {
  MatrixXd p1(2, 2), p2(2, 2);
  p1 << 0.5, 0.0, 0.0, 0.5;
  p2 << 0.0, 0.5, 0.5, 0.0;
  CHECK(plan_identity(p1) == plan_identity(p1));
  CHECK(plan_identity(p1) != plan_identity(p2));
}
