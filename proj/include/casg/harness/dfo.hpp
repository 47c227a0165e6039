#pragma once

// Derivative-free optimization runs: L-BFGS with pluggable gradient
// estimators over a problem set, a grid of step sizes and repeated seeds.

#include <cstdint>
#include <string>
#include <vector>

#include "casg/harness/lbfgs.hpp"
#include "casg/harness/problem.hpp"

namespace casg::harness {

/// Estimator names: casg_exact, ecasg_exact, fd_exact, casg_rbf, ecasg_rbf,
/// fd_rbf, cd, global_grad. "exact" methods use the true Hessian (closed
/// form or a noiseless central-difference Hessian); "rbf" methods and
/// global_grad use the global model. casg_* falls back to the partitioned
/// construction when d is not a power of two.
const std::vector<std::string>& dfo_method_names();
bool is_model_method(const std::string& method);

struct DfoConfig {
  std::vector<Problem> problems;
  std::vector<std::string> methods;
  std::vector<double> h_values{0.1, 0.01, 0.001};
  double sigma = 1e-5;
  int runs = 10;
  std::uint64_t seed = 1;
  int init_points_per_dim = 100;
  double init_half_width = 1.0;    ///< init sample cube x0 ± this
  bool include_init_cost = false;  ///< charge the init sample to the budget
  bool admit_line_search = false;  ///< add line-search points to the history
  double smoothing = 0.1;
  double exact_hessian_step = 1e-4;
  LbfgsOptions lbfgs;
};

struct RunRecord {
  std::string problem;
  std::string method;
  double h = 0.0;
  double sigma = 0.0;
  int run = 0;
  std::uint64_t seed = 0;
  int dim = 0;
  double initial_value = 0.0;
  std::vector<TracePoint> trace;
  int gradient_estimates = 0;
  std::uint64_t gradient_evaluations = 0;
  std::uint64_t line_search_evaluations = 0;
  std::uint64_t init_evaluations = 0;
  bool failed = false;
  std::string error;
  std::string stop_reason;

  /// Best noiseless value reached, or the initial value without any trace.
  double final_value() const;
};

/// Noise and init-sample seed for one (problem, h, run) cell; shared by all
/// methods so method comparisons are paired.
std::uint64_t run_seed(std::uint64_t root, std::size_t problem, std::size_t h_index, int run);

/// Single run. Failures are recorded in the returned record, never thrown.
RunRecord dfo_single(const Problem& problem, const std::string& method, double h, int run,
                     std::uint64_t seed, const DfoConfig& config);

/// Every (problem, method, h, run), sorted by problem, method, h, run.
/// Throws Config for unknown methods or an empty problem/method list.
std::vector<RunRecord> dfo_run(const DfoConfig& config, int threads);

/// For each (problem, method) keeps the runs of the h with the lowest mean
/// final value (ties: first h in the records).
std::vector<RunRecord> select_best_h(const std::vector<RunRecord>& records);

}  // namespace casg::harness
