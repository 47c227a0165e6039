#pragma once

// Noiseless reference derivatives: closed form where the problem supplies it,
// Richardson-refined central differences otherwise.

#include <functional>

#include "casg/harness/problem.hpp"

namespace casg::harness {

struct RichardsonOptions {
  double initial_step = 1e-4;  ///< relative to max(1, |xᵢ|)
  double tolerance = 1e-7;     ///< relative change between successive levels
  int max_levels = 6;
};

struct RichardsonResult {
  Vec value;
  double last_change = 0.0;  ///< relative difference of the final two extrapolants
  int levels = 0;
  bool converged = false;
};

/// Central differences of `f` at x with steps halved per level and
/// Neville extrapolation in step², stopping once successive extrapolants agree.
RichardsonResult richardson_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                                     const RichardsonOptions& options = {});

/// Jacobian of a vector field by the same scheme, symmetrized.
Mat richardson_hessian(const std::function<Vec(const Vec&)>& grad, const Vec& x,
                       const RichardsonOptions& options = {});

Vec reference_gradient(const Problem& problem, const Vec& x);
Mat reference_hessian(const Problem& problem, const Vec& x);

/// Single-level central-difference Hessian from function values: 2d² + 1
/// evaluations, error O(step²). Cheap stand-in for the optimization runs.
Mat central_hessian(const std::function<double(const Vec&)>& f, const Vec& x, double step);

}  // namespace casg::harness
