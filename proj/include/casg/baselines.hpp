#pragma once

// Reference estimators: objective-optimal forward differences and fixed-step
// central differences.

#include <utility>

#include "casg/simplex.hpp"

namespace casg {

/// Per-coordinate forward-difference step lengths, 0 < tᵢ ≤ h.
struct FdSteps {
  Vec t;
};

/// Forward differences with S = diag(t) minimizing the objective restricted
/// to diagonal S: tᵢ = min(h, (8σ²/Hᵢᵢ²)^{1/4}), or h where Hᵢᵢ = 0. Only the
/// diagonal of H is used.
std::pair<SampleSet, FdSteps> fd_sample_set(const CurvatureSpec& spec, const Vec& x0);

struct GradientEstimate {
  Vec gradient;
  EvaluationHistory evaluations;
};

/// gᵢ = (f(x0 + h eᵢ) − f(x0 − h eᵢ)) / 2h; 2d evaluations.
GradientEstimate cd_estimate(const NoisyFunction& f, const Vec& x0, double h_step);

/// Evaluates all d+1 points of `sample` once and returns the simplex gradient.
GradientEstimate fd_estimate(const NoisyFunction& f, const SampleSet& sample);

}  // namespace casg
