#include "wassid/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "wassid/errors.hpp"
#include "wassid/spd.hpp"

namespace wassid {

void validate(const Coupling& c) {
  if (c.plan.rows() != c.source_weights.size() ||
      c.plan.cols() != c.target_weights.size()) {
    throw std::invalid_argument("coupling shape mismatch");
  }
  if ((c.plan.array() < 0.0).any()) {
    throw std::invalid_argument("coupling has negative entries");
  }
  const double row_err =
      (c.plan.rowwise().sum() - c.source_weights).cwiseAbs().maxCoeff();
  const double col_err =
      (c.plan.colwise().sum().transpose() - c.target_weights)
          .cwiseAbs()
          .maxCoeff();
  if (row_err > tol::kMarginal || col_err > tol::kMarginal) {
    throw std::invalid_argument("coupling marginals do not match");
  }
}

double w2_gaussian(const GaussianMeasure& g0, const GaussianMeasure& g1) {
  if (g0.dim() != g1.dim()) {
    throw std::invalid_argument("measures have different dimensions");
  }
  const Eigen::MatrixXd r1 = sqrt_spd(symmetrized(g1.cov));
  const Eigen::MatrixXd cross =
      sqrt_spd(symmetrized(r1 * g0.cov * r1.transpose()));
  double arg = (g0.mean - g1.mean).squaredNorm() + g0.cov.trace() +
               g1.cov.trace() - 2.0 * cross.trace();
  const double scale =
      1.0 + std::abs(g0.cov.trace()) + std::abs(g1.cov.trace());
  if (arg < -tol::kTraceClamp * scale) {
    throw NumericalError("negative squared distance beyond round-off");
  }
  return std::sqrt(std::max(arg, 0.0));
}

MongeMap monge_map_gaussian(const GaussianMeasure& g0,
                            const GaussianMeasure& g1) {
  if (g0.dim() != g1.dim()) {
    throw std::invalid_argument("measures have different dimensions");
  }
  const SymEig eig = sym_eig(symmetrized(g0.cov));
  const double lmax = eig.eigenvalues.maxCoeff();
  const double lmin = eig.eigenvalues.minCoeff();
  if (!(lmin > tol::kStrictPdRel * lmax)) {
    throw SingularMatrixError("source covariance is numerically singular",
                              lmin > 0.0 ? lmax / lmin
                                         : std::numeric_limits<double>::infinity());
  }
  const Eigen::ArrayXd roots = eig.eigenvalues.array().sqrt();
  const Eigen::MatrixXd r0 =
      eig.eigenvectors * roots.matrix().asDiagonal() * eig.eigenvectors.transpose();
  const Eigen::MatrixXd r0_inv = eig.eigenvectors *
                                 roots.inverse().matrix().asDiagonal() *
                                 eig.eigenvectors.transpose();
  const Eigen::MatrixXd inner =
      sqrt_spd(symmetrized(r0 * g1.cov * r0.transpose()));
  MongeMap map;
  map.t = symmetrized(r0_inv * inner * r0_inv.transpose());
  map.offset = g1.mean - map.t * g0.mean;
  return map;
}

Eigen::MatrixXd squared_distance_matrix(const EmpiricalMeasure& e0,
                                        const EmpiricalMeasure& e1) {
  if (e0.dim() != e1.dim()) {
    throw std::invalid_argument("measures have different dimensions");
  }
  Eigen::MatrixXd d2(e0.size(), e1.size());
  for (Eigen::Index j = 0; j < e0.size(); ++j) {
    for (Eigen::Index k = 0; k < e1.size(); ++k) {
      d2(j, k) = (e0.points.row(j) - e1.points.row(k)).squaredNorm();
    }
  }
  return d2;
}

namespace detail {

bool is_uniform(const Eigen::VectorXd& w) {
  const double target = 1.0 / static_cast<double>(w.size());
  return (w.array() - target).abs().maxCoeff() <= tol::kUniformWeight * target;
}

namespace {

// One Dijkstra pass of the shortest-augmenting-path assignment solver.
int augmenting_path(int nc, const std::vector<double>& cost,
                    std::vector<double>& u, std::vector<double>& v,
                    std::vector<int>& path, const std::vector<int>& row4col,
                    std::vector<double>& shortest, std::vector<bool>& sr,
                    std::vector<bool>& sc, std::vector<int>& remaining,
                    int cur_row, double* out_min) {
  const double inf = std::numeric_limits<double>::infinity();
  double min_val = 0.0;
  int num_remaining = nc;
  for (int it = 0; it < nc; ++it) remaining[it] = nc - it - 1;
  std::fill(sr.begin(), sr.end(), false);
  std::fill(sc.begin(), sc.end(), false);
  std::fill(shortest.begin(), shortest.end(), inf);

  int i = cur_row;
  int sink = -1;
  while (sink == -1) {
    int index = -1;
    double lowest = inf;
    sr[i] = true;
    for (int it = 0; it < num_remaining; ++it) {
      const int j = remaining[it];
      const double r = min_val + cost[static_cast<std::size_t>(i) * nc + j] -
                       u[i] - v[j];
      if (r < shortest[j]) {
        path[j] = i;
        shortest[j] = r;
      }
      if (shortest[j] < lowest ||
          (shortest[j] == lowest && row4col[j] == -1)) {
        lowest = shortest[j];
        index = it;
      }
    }
    min_val = lowest;
    if (min_val == inf) return -1;
    const int j = remaining[index];
    if (row4col[j] == -1) {
      sink = j;
    } else {
      i = row4col[j];
    }
    sc[j] = true;
    remaining[index] = remaining[--num_remaining];
  }
  *out_min = min_val;
  return sink;
}

}  // namespace

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost_matrix) {
  const int n = static_cast<int>(cost_matrix.rows());
  if (cost_matrix.cols() != n) {
    throw std::invalid_argument("assignment needs a square cost matrix");
  }
  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cost[static_cast<std::size_t>(i) * n + j] = cost_matrix(i, j);
    }
  }
  std::vector<double> u(n, 0.0), v(n, 0.0), shortest(n);
  std::vector<int> path(n, -1), col4row(n, -1), row4col(n, -1), remaining(n);
  std::vector<bool> sr(n), sc(n);

  for (int cur_row = 0; cur_row < n; ++cur_row) {
    double min_val = 0.0;
    const int sink = augmenting_path(n, cost, u, v, path, row4col, shortest,
                                     sr, sc, remaining, cur_row, &min_val);
    if (sink < 0) throw NumericalError("assignment problem is infeasible");
    u[cur_row] += min_val;
    for (int i = 0; i < n; ++i) {
      if (sr[i] && i != cur_row) u[i] += min_val - shortest[col4row[i]];
    }
    for (int j = 0; j < n; ++j) {
      if (sc[j]) v[j] -= min_val - shortest[j];
    }
    int j = sink;
    while (true) {
      const int i = path[j];
      row4col[j] = i;
      std::swap(col4row[i], j);
      if (i == cur_row) break;
    }
  }
  return col4row;
}

namespace {

struct BasicCell {
  int i;
  int j;
  double mass;
};

// Dual potentials from the spanning-tree basis (u[row 0] anchored at 0).
void tree_duals(int n0, int n1, const std::vector<BasicCell>& basis,
                const Eigen::MatrixXd& cost, std::vector<double>& u,
                std::vector<double>& v) {
  const int n_nodes = n0 + n1;
  std::vector<std::vector<int>> adj(n_nodes);
  for (int b = 0; b < static_cast<int>(basis.size()); ++b) {
    adj[basis[b].i].push_back(b);
    adj[n0 + basis[b].j].push_back(b);
  }
  std::vector<bool> seen(n_nodes, false);
  std::vector<int> queue;
  queue.reserve(n_nodes);
  queue.push_back(0);
  seen[0] = true;
  u[0] = 0.0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int node = queue[head];
    for (const int b : adj[node]) {
      const BasicCell& cell = basis[b];
      const int other = (node == cell.i) ? n0 + cell.j : cell.i;
      if (seen[other]) continue;
      seen[other] = true;
      if (other >= n0) {
        v[other - n0] = cost(cell.i, cell.j) - u[cell.i];
      } else {
        u[other] = cost(cell.i, cell.j) - v[cell.j];
      }
      queue.push_back(other);
    }
  }
  if (queue.size() != static_cast<std::size_t>(n_nodes)) {
    throw NumericalError("transport basis is not a spanning tree");
  }
}

// Tree path from row node `ei` to column node `ej` as a list of basis cells.
std::vector<int> tree_path(int n0, int n1, const std::vector<BasicCell>& basis,
                           int ei, int ej) {
  const int n_nodes = n0 + n1;
  std::vector<std::vector<int>> adj(n_nodes);
  for (int b = 0; b < static_cast<int>(basis.size()); ++b) {
    adj[basis[b].i].push_back(b);
    adj[n0 + basis[b].j].push_back(b);
  }
  std::vector<int> parent_cell(n_nodes, -1), parent_node(n_nodes, -1);
  std::vector<bool> seen(n_nodes, false);
  std::vector<int> queue;
  queue.push_back(ei);
  seen[ei] = true;
  const int target = n0 + ej;
  for (std::size_t head = 0; head < queue.size() && !seen[target]; ++head) {
    const int node = queue[head];
    for (const int b : adj[node]) {
      const BasicCell& cell = basis[b];
      const int other = (node == cell.i) ? n0 + cell.j : cell.i;
      if (seen[other]) continue;
      seen[other] = true;
      parent_cell[other] = b;
      parent_node[other] = node;
      queue.push_back(other);
    }
  }
  if (!seen[target]) {
    throw NumericalError("transport basis is not connected");
  }
  std::vector<int> path;
  for (int node = target; node != ei; node = parent_node[node]) {
    path.push_back(parent_cell[node]);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

Eigen::MatrixXd solve_transport_simplex(const Eigen::MatrixXd& cost,
                                        const Eigen::VectorXd& w0,
                                        const Eigen::VectorXd& w1) {
  const int n0 = static_cast<int>(w0.size());
  const int n1 = static_cast<int>(w1.size());
  std::vector<BasicCell> basis;
  basis.reserve(n0 + n1 - 1);

  Eigen::VectorXd a = w0;
  Eigen::VectorXd b = w1;
  int i = 0, j = 0;
  for (int step = 0; step < n0 + n1 - 1; ++step) {
    const double m = std::min(a(i), b(j));
    basis.push_back({i, j, m});
    a(i) -= m;
    b(j) -= m;
    if (a(i) <= 0.0 && i < n0 - 1) {
      ++i;
    } else if (j < n1 - 1) {
      ++j;
    } else {
      ++i;
    }
  }

  std::vector<double> u(n0, 0.0), v(n1, 0.0);
  const double price_tol =
      tol::kReducedCost * (1.0 + cost.cwiseAbs().maxCoeff());
  const long max_pivots =
      10000L + 100L * static_cast<long>(n0 + n1) * std::max(n0, n1);

  for (long pivot = 0;; ++pivot) {
    if (pivot > max_pivots) {
      throw NumericalError("transport simplex exceeded pivot budget");
    }
    tree_duals(n0, n1, basis, cost, u, v);

    int ei = -1, ej = -1;
    for (int r = 0; r < n0 && ei == -1; ++r) {
      for (int c = 0; c < n1; ++c) {
        if (cost(r, c) - u[r] - v[c] < -price_tol) {
          bool basic = false;
          for (const BasicCell& cell : basis) {
            if (cell.i == r && cell.j == c) {
              basic = true;
              break;
            }
          }
          if (!basic) {
            ei = r;
            ej = c;
            break;
          }
        }
      }
    }
    if (ei == -1) break;

    const std::vector<int> path = tree_path(n0, n1, basis, ei, ej);
    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    for (std::size_t p = 0; p < path.size(); p += 2) {
      const BasicCell& cell = basis[path[p]];
      if (cell.mass < theta ||
          (cell.mass == theta &&
           (leaving == -1 || cell.i < basis[leaving].i ||
            (cell.i == basis[leaving].i && cell.j < basis[leaving].j)))) {
        theta = cell.mass;
        leaving = path[p];
      }
    }
    for (std::size_t p = 0; p < path.size(); ++p) {
      basis[path[p]].mass += (p % 2 == 0) ? -theta : theta;
    }
    basis[leaving] = {ei, ej, theta};
  }

  Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(n0, n1);
  for (const BasicCell& cell : basis) plan(cell.i, cell.j) += cell.mass;
  return plan;
}

Eigen::MatrixXd solve_sorted_1d(const EmpiricalMeasure& e0,
                                const EmpiricalMeasure& e1) {
  const Eigen::Index n0 = e0.size();
  const Eigen::Index n1 = e1.size();
  std::vector<Eigen::Index> o0(n0), o1(n1);
  std::iota(o0.begin(), o0.end(), Eigen::Index{0});
  std::iota(o1.begin(), o1.end(), Eigen::Index{0});
  const auto by_value = [](const Eigen::MatrixXd& pts) {
    return [&pts](Eigen::Index l, Eigen::Index r) {
      return pts(l, 0) != pts(r, 0) ? pts(l, 0) < pts(r, 0) : l < r;
    };
  };
  std::sort(o0.begin(), o0.end(), by_value(e0.points));
  std::sort(o1.begin(), o1.end(), by_value(e1.points));

  Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(n0, n1);
  Eigen::Index i = 0, j = 0;
  double r = e0.weights(o0[0]);
  double s = e1.weights(o1[0]);
  while (true) {
    const double m = std::min(r, s);
    if (m > 0.0) plan(o0[i], o1[j]) += m;
    r -= m;
    s -= m;
    if (r <= s) {
      if (++i == n0) break;
      r = e0.weights(o0[i]);
    } else {
      if (++j == n1) break;
      s = e1.weights(o1[j]);
    }
  }
  return plan;
}

}  // namespace detail

Coupling solve_discrete_ot(const EmpiricalMeasure& e0,
                           const EmpiricalMeasure& e1) {
  validate(e0);
  validate(e1);
  const Eigen::MatrixXd d2 = squared_distance_matrix(e0, e1);

  Coupling out;
  out.source_weights = e0.weights;
  out.target_weights = e1.weights;
  if (e0.dim() == 1) {
    out.plan = detail::solve_sorted_1d(e0, e1);
  } else if (e0.size() == e1.size() && detail::is_uniform(e0.weights) &&
             detail::is_uniform(e1.weights)) {
    const std::vector<int> match = detail::solve_assignment(d2);
    out.plan = Eigen::MatrixXd::Zero(e0.size(), e1.size());
    const double mass = 1.0 / static_cast<double>(e0.size());
    for (Eigen::Index row = 0; row < e0.size(); ++row) {
      out.plan(row, match[static_cast<std::size_t>(row)]) = mass;
    }
  } else {
    out.plan = detail::solve_transport_simplex(d2, e0.weights, e1.weights);
  }

  double cost = 0.0;
  for (Eigen::Index row = 0; row < out.plan.rows(); ++row) {
    for (Eigen::Index col = 0; col < out.plan.cols(); ++col) {
      if (out.plan(row, col) > 0.0) cost += out.plan(row, col) * d2(row, col);
    }
  }
  out.cost = cost;
  return out;
}

double w2_empirical(const EmpiricalMeasure& e0, const EmpiricalMeasure& e1) {
  return std::sqrt(std::max(solve_discrete_ot(e0, e1).cost, 0.0));
}

}  // namespace wassid
