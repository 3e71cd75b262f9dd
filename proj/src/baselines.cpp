#include "wassid/baselines.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "wassid/rng.hpp"

namespace wassid {

Eigen::Index UlamGrid::n_boxes() const {
  Eigen::Index n = 1;
  for (const Eigen::Index b : boxes) n *= b;
  return n;
}

Eigen::Index UlamGrid::box_index(const Eigen::VectorXd& x) const {
  Eigen::Index flat = 0;
  for (Eigen::Index axis = 0; axis < dim(); ++axis) {
    if (!(x(axis) >= lo(axis) && x(axis) <= hi(axis))) return -1;
    const double width = (hi(axis) - lo(axis)) / static_cast<double>(boxes[axis]);
    Eigen::Index cell =
        static_cast<Eigen::Index>(std::floor((x(axis) - lo(axis)) / width));
    if (cell < 0) cell = 0;
    if (cell >= boxes[axis]) cell = boxes[axis] - 1;
    flat = flat * boxes[axis] + cell;
  }
  return flat;
}

void UlamGrid::box_bounds(Eigen::Index box, Eigen::VectorXd& box_lo,
                          Eigen::VectorXd& box_hi) const {
  box_lo.resize(dim());
  box_hi.resize(dim());
  for (Eigen::Index axis = dim() - 1; axis >= 0; --axis) {
    const Eigen::Index cell = box % boxes[axis];
    box /= boxes[axis];
    const double width = (hi(axis) - lo(axis)) / static_cast<double>(boxes[axis]);
    box_lo(axis) = lo(axis) + static_cast<double>(cell) * width;
    box_hi(axis) = box_lo(axis) + width;
  }
}

void validate(const UlamGrid& grid) {
  if (grid.dim() < 1 || grid.hi.size() != grid.dim() ||
      static_cast<Eigen::Index>(grid.boxes.size()) != grid.dim()) {
    throw std::invalid_argument("grid axes are inconsistent");
  }
  for (Eigen::Index axis = 0; axis < grid.dim(); ++axis) {
    if (!(grid.hi(axis) > grid.lo(axis)) || grid.boxes[axis] < 1) {
      throw std::invalid_argument("grid axis has empty extent or no boxes");
    }
  }
}

UlamMatrix ulam_matrix(const PointMap& s, const UlamGrid& grid, int k,
                       std::uint64_t seed) {
  validate(grid);
  if (k < 1) throw std::invalid_argument("need k >= 1 samples per box");
  const Eigen::Index n = grid.n_boxes();
  UlamMatrix out;
  out.p = Eigen::MatrixXd::Zero(n, n);
  out.samples_per_box = k;
  out.escape = Eigen::VectorXd::Zero(n);

  Eigen::VectorXd box_lo(grid.dim()), box_hi(grid.dim()), x(grid.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    grid.box_bounds(i, box_lo, box_hi);
    std::mt19937_64 gen(derive_seed(seed, static_cast<std::uint64_t>(i)));
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(n);
    int escaped = 0;
    for (int sample = 0; sample < k; ++sample) {
      for (Eigen::Index axis = 0; axis < grid.dim(); ++axis) {
        std::uniform_real_distribution<double> uniform(box_lo(axis),
                                                       box_hi(axis));
        x(axis) = uniform(gen);
      }
      const Eigen::Index j = grid.box_index(s(x));
      if (j < 0) {
        ++escaped;
      } else {
        ++counts(j);
      }
    }
    out.p.row(i) = counts.cast<double>() / static_cast<double>(k);
    out.escape(i) = static_cast<double>(escaped) / static_cast<double>(k);
  }
  return out;
}

EdmdResult edmd_fit(const std::vector<Eigen::VectorXd>& trajectory,
                    const std::vector<Observable>& dictionary) {
  const Eigen::Index m = static_cast<Eigen::Index>(trajectory.size());
  const Eigen::Index n_obs = static_cast<Eigen::Index>(dictionary.size());
  if (m < 2) throw std::invalid_argument("need a trajectory of length >= 2");
  if (n_obs < 1) throw std::invalid_argument("need >= 1 observable");

  Eigen::MatrixXd phi(n_obs, m);
  for (Eigen::Index t = 0; t < m; ++t) {
    for (Eigen::Index r = 0; r < n_obs; ++r) {
      phi(r, t) = dictionary[static_cast<std::size_t>(r)](trajectory[static_cast<std::size_t>(t)]);
    }
  }
  const Eigen::MatrixXd phi_past = phi.leftCols(m - 1);
  const Eigen::MatrixXd phi_next = phi.rightCols(m - 1);
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(
      phi_past.transpose());
  EdmdResult out;
  out.k = cod.solve(phi_next.transpose()).transpose();
  out.rank = cod.rank();
  out.rank_deficient = out.rank < n_obs;
  return out;
}

Eigen::MatrixXd dmd_least_squares(const std::vector<Eigen::VectorXd>& trajectory) {
  const Eigen::Index m = static_cast<Eigen::Index>(trajectory.size());
  if (m < 2) throw std::invalid_argument("need a trajectory of length >= 2");
  const Eigen::Index d = trajectory.front().size();
  Eigen::MatrixXd past(d, m - 1), next(d, m - 1);
  for (Eigen::Index t = 0; t + 1 < m; ++t) {
    past.col(t) = trajectory[static_cast<std::size_t>(t)];
    next.col(t) = trajectory[static_cast<std::size_t>(t + 1)];
  }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(
      past.transpose());
  return cod.solve(next.transpose()).transpose();
}

}  // namespace wassid
