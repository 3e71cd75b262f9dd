#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "wassid/measures.hpp"

namespace wassid {

// Axis-aligned partition of the box [lo, hi] into prod(boxes) cells.
struct UlamGrid {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  std::vector<Eigen::Index> boxes;

  Eigen::Index dim() const { return lo.size(); }
  Eigen::Index n_boxes() const;
  Eigen::Index box_index(const Eigen::VectorXd& x) const;  // -1 when outside
  void box_bounds(Eigen::Index box, Eigen::VectorXd& box_lo,
                  Eigen::VectorXd& box_hi) const;
};

void validate(const UlamGrid& grid);

struct UlamMatrix {
  Eigen::MatrixXd p;
  int samples_per_box = 0;
  Eigen::VectorXd escape;
};

UlamMatrix ulam_matrix(const PointMap& s, const UlamGrid& grid, int k,
                       std::uint64_t seed);

using Observable = std::function<double(const Eigen::VectorXd&)>;

struct EdmdResult {
  Eigen::MatrixXd k;
  Eigen::Index rank = 0;
  bool rank_deficient = false;
};

EdmdResult edmd_fit(const std::vector<Eigen::VectorXd>& trajectory,
                    const std::vector<Observable>& dictionary);

Eigen::MatrixXd dmd_least_squares(const std::vector<Eigen::VectorXd>& trajectory);

}  // namespace wassid
