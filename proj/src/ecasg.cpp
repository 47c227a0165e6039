#include "casg/ecasg.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "casg/casg.hpp"
#include "casg/error.hpp"

namespace casg {

Partition subdivide(const Vec& d_sorted) {
  const int n = static_cast<int>(d_sorted.size());
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "cannot partition an empty space");
  for (int i = 1; i < n; ++i) {
    if (d_sorted(i) < d_sorted(i - 1)) throw Error(ErrorKind::InvalidArgument, "D must be increasing");
  }
  std::vector<int> sizes;
  for (int bit = std::bit_width(static_cast<unsigned>(n)) - 1; bit >= 0; --bit) {
    if ((n >> bit) & 1) sizes.push_back(1 << bit);
  }
  Partition part;
  part.cells.resize(sizes.size());
  int lo = 0;
  int hi = n - 1;
  std::size_t c = 0;
  while (lo <= hi) {
    auto& cell = part.cells[c];
    const int cap = sizes[c];
    if (static_cast<int>(cell.size()) < cap) {
      if (cap == 1) {
        cell.push_back(lo++);
      } else {
        cell.push_back(lo++);
        cell.push_back(hi--);
      }
    }
    c = (c + 1) % sizes.size();
  }
  for (auto& cell : part.cells) std::sort(cell.begin(), cell.end());
  return part;
}

EcasgResult ecasg_sample_set(const CurvatureSpec& spec, const Vec& x0) {
  const int n = spec.dim();
  if (x0.size() != n) throw Error(ErrorKind::InvalidArgument, "x0 dimension mismatch");
  if (!x0.allFinite()) throw Error(ErrorKind::NonFiniteInput, "x0 has non-finite entries");
  const Vec& d = spec.eigenvalues();

  // Partition on the positive-trace orientation; cells map back to indices
  // of the increasing eigenvalues.
  const bool flip = d.sum() < 0.0;
  const Vec work = flip ? Vec(-d.reverse()) : d;
  Partition part = subdivide(work);
  if (flip) {
    for (auto& cell : part.cells) {
      for (int& idx : cell) idx = n - 1 - idx;
      std::sort(cell.begin(), cell.end());
    }
  }

  Mat s_basis = Mat::Zero(n, n);
  std::vector<double> cell_obj;
  double total = 0.0;
  int col = 0;
  for (std::size_t c = 0; c < part.cells.size(); ++c) {
    const auto& cell = part.cells[c];
    const int m = static_cast<int>(cell.size());
    Vec dc(m);
    for (int p = 0; p < m; ++p) dc(p) = d(cell[p]);
    detail::DiagonalSolution sol;
    try {
      sol = detail::solve_diagonal(dc, spec.sigma(), spec.h());
    } catch (const Error& e) {
      throw e.with_context("cell " + std::to_string(c));
    }
    for (int p = 0; p < m; ++p) {
      for (int q = 0; q < m; ++q) s_basis(cell[p], col + q) = sol.s(p, q);
    }
    col += m;
    cell_obj.push_back(sol.objective);
    total += sol.objective;
  }

  Mat s = spec.rotation() * s_basis;
  SampleSet sample = SampleSet::from_differences(x0, s);
  return EcasgResult{std::move(sample), DifferenceMatrix(std::move(s)), total, std::move(part),
                     std::move(cell_obj)};
}

}  // namespace casg
