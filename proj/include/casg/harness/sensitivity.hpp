#pragma once

// Gradient-estimation accuracy at random points of a problem's domain.

#include <cstdint>
#include <string>
#include <vector>

#include "casg/global_model.hpp"
#include "casg/harness/problem.hpp"

namespace casg::harness {

/// Method names as for the optimization runs: casg_exact, ecasg_exact,
/// fd_exact, casg_rbf, ecasg_rbf, fd_rbf, cd, global_grad.
struct SensitivityConfig {
  Problem problem;
  std::vector<std::string> methods;
  std::vector<double> h_values;
  double sigma = 1e-5;
  int points = 100;
  int model_points = 2000;
  double smoothing = 0.0;
  std::vector<int> sweep_sizes;  ///< model sizes for the error-vs-history sweep
  std::uint64_t seed = 1;
};

/// Exact MSE of a simplex gradient built on S for the noisy version of f:
/// ‖S^{-T}δf − ∇f‖² with noiseless δf, plus the noise error of S.
double simplex_mse(const std::function<double(const Vec&)>& f, const Vec& x, const Vec& true_gradient,
                   const DifferenceMatrix& s, double sigma);

/// Exact MSE of central differences: noiseless bias² + dσ²/(2h²).
double cd_mse(const std::function<double(const Vec&)>& f, const Vec& x, const Vec& true_gradient,
              double h, double sigma);

struct SensitivityRow {
  int point = 0;
  std::string method;
  double h = 0.0;  ///< 0 for global_grad
  double mse = 0.0;
  bool failed = false;
  std::string error;
};

struct MethodSummary {
  std::string method;
  double best_h = 0.0;  ///< h with the lowest median MSE
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  std::string baseline;             ///< method the log ratios are taken against
  double median_log2_ratio = 0.0;   ///< median of log₂(MSE/MSE_baseline)
  int failures = 0;
};

struct SweepRow {
  int model_size = 0;
  std::string method;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct SensitivityResult {
  std::vector<SensitivityRow> rows;  ///< sorted by point, method, h
  std::vector<MethodSummary> summary;
  std::vector<SweepRow> sweep;
  std::vector<std::string> failures;
};

SensitivityResult sensitivity_experiment(const SensitivityConfig& config, int threads);

/// Linear-interpolated quantile of an unsorted sample.
double quantile(std::vector<double> v, double q);

/// k·x² + y² at the origin with the exact Hessian given to every design.
struct ToyRow {
  double k = 0.0;
  double casg_objective = 0.0;
  double fd_objective = 0.0;
  double casg_approximation_error = 0.0;
  double cd_noise_error = 0.0;
};

std::vector<ToyRow> toy_sweep(const std::vector<double>& ks, double sigma, double h);

}  // namespace casg::harness
