#pragma once

// Limited-memory BFGS driven by an approximate gradient and noisy values.

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "casg/simplex.hpp"

namespace casg::harness {

struct LbfgsOptions {
  int memory = 10;
  double armijo = 1e-4;
  double noise_allowance = 2.0;  ///< Armijo test relaxed by this many σ
  int max_backtracks = 30;
  double budget = 200.0;         ///< in simplex gradients (evaluations / d)
  int max_iterations = 100000;
};

/// Gradient estimate at x; `value` is the noisy f(x) when the estimator
/// evaluated it, NaN otherwise.
struct GradientSample {
  Vec gradient;
  double value = std::numeric_limits<double>::quiet_NaN();
};

struct TracePoint {
  std::uint64_t evaluations = 0;  ///< cumulative, including any offset
  double value = 0.0;             ///< best noiseless value so far
};

struct LbfgsResult {
  Vec x;
  std::vector<TracePoint> trace;  ///< one point per completed iteration
  double initial_value = 0.0;     ///< noiseless f(x0)
  int gradient_estimates = 0;
  std::uint64_t gradient_evaluations = 0;
  std::uint64_t line_search_evaluations = 0;
  std::string stop_reason;
};

struct LbfgsProblem {
  std::function<double(const Vec&)> noisy;   ///< every call counts as one evaluation
  std::function<GradientSample(const Vec&)> gradient;
  std::function<double(const Vec&)> exact;  ///< noiseless value for the trace, not counted
  std::function<std::uint64_t()> evaluations;  ///< evaluations so far
  double sigma = 0.0;
  int dim = 0;
  std::uint64_t evaluation_offset = 0;      ///< charged before the first iteration
};

LbfgsResult lbfgs(const LbfgsProblem& problem, const Vec& x0, const LbfgsOptions& options = {});

}  // namespace casg::harness
