#pragma once

// Global surrogate built from the evaluation history: a cubic radial-basis
// interpolant r³ with an affine tail, queried analytically for its gradient
// and Hessian. The Hessian at x0 parameterizes the local sample-set design.

#include <variant>

#include "casg/simplex.hpp"

namespace casg {

class RbfModel {
 public:
  RbfModel() = default;

  int dim() const { return static_cast<int>(centers_.cols()); }
  int size() const { return static_cast<int>(centers_.rows()); }
  double smoothing() const { return smoothing_; }

  /// Fitting centers, one per row, in problem coordinates.
  Mat centers() const;
  /// Kernel weights in problem units.
  Vec weights() const;
  /// Affine tail [constant, linear...] in problem units (d+1 entries).
  Vec tail() const;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  /// Exactly symmetric.
  Mat hessian(const Vec& x) const;

 private:
  friend RbfModel fit_rbf(const EvaluationHistory& history, double smoothing);

  // Coordinates are shifted and scaled internally: z = (x − shift)/scale.
  Mat centers_;  // normalized
  Vec weights_;  // normalized-space coefficients
  Vec tail_;     // normalized-space coefficients
  Vec shift_;
  double scale_ = 1.0;
  double smoothing_ = 0.0;
};

/// Solves [K + smoothing·I, P; Pᵀ, 0][w; c] = [y; 0] with K_ij = ‖xᵢ − xⱼ‖³.
/// Throws DegenerateGeometry for fewer than d+2 points or an estimated
/// condition number above 1e12.
RbfModel fit_rbf(const EvaluationHistory& history, double smoothing);

enum class QueryOrder { Value, Gradient, Hessian };
using QueryResult = std::variant<double, Vec, Mat>;

QueryResult model_query(const RbfModel& model, const Vec& x, QueryOrder order);

struct FilterPolicy {
  enum class Mode { All, NearestK, LatestK };
  Mode mode = Mode::NearestK;
  int k = 0;
  double dedup_radius = 1e-9;

  /// nearest_k with k = min(100·d, 1000) and dedup radius 1e-9.
  static FilterPolicy standard(int dim);
};

/// Subset of `history` selected by `policy` around x0, in step order.
/// Points within dedup_radius of an already selected point are dropped.
EvaluationHistory filter_history(const EvaluationHistory& history, const FilterPolicy& policy,
                                 const Vec& x0);

enum class EstimatorKind { Casg, Ecasg, Fd, GlobalGrad };

/// Step of the global-model framework.
struct FrameworkResult {
  Vec gradient;
  EvaluationHistory history;  ///< input history plus the new evaluations
  Mat hessian;                ///< model Hessian at x0
  int estimate_evaluations = 0;  ///< evaluations consumed by the gradient estimate
  int stencil_evaluations = 0;   ///< artificial stencil added for GlobalGrad
};

/// Stencil step appended to the history after a GlobalGrad estimate.
inline constexpr double kGlobalGradStencil = 0.1;

/// Filter, fit, take the model Hessian at x0, build the estimator's sample
/// set from (Hessian, σ, h), evaluate f and extend the history. GlobalGrad
/// returns ∇φ(x0) and only appends a forward-difference stencil of length
/// 0.1. The input history is never modified.
FrameworkResult framework_step(const EvaluationHistory& history, const FilterPolicy& policy,
                               double smoothing, EstimatorKind estimator, double sigma, double h,
                               const NoisyFunction& f, const Vec& x0);

}  // namespace casg
