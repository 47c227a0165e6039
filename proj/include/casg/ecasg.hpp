#pragma once

// Arbitrary-dimension sample sets: the eigen-directions are split into
// power-of-two cells (one per set bit of d) and each cell is solved
// independently; the objective is additive over the cells.

#include <vector>

#include "casg/simplex.hpp"

namespace casg {

/// Cells of 0-based indices (increasing) into an increasing curvature vector. Cells are
/// ordered by decreasing size.
struct Partition {
  std::vector<std::vector<int>> cells;
};

/// Pairs the lowest and highest remaining curvatures, visiting the cells
/// round-robin (largest first); the size-1 cell takes a single lowest index.
Partition subdivide(const Vec& d_sorted);

struct EcasgResult {
  SampleSet sample;
  DifferenceMatrix s;
  double objective_value = 0.0;
  Partition partition;                  ///< indices into spec.eigenvalues()
  std::vector<double> cell_objectives;  ///< same order as partition.cells
};

/// Block-diagonal optimum in the eigenbasis under the subdivide() partition,
/// rotated back to the original coordinates. Any d ≥ 1.
EcasgResult ecasg_sample_set(const CurvatureSpec& spec, const Vec& x0);

}  // namespace casg
