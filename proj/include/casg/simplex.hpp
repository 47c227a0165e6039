#pragma once

// Sample sets, the simplex gradient and the mean-squared-error functionals
// used to score a sample set.

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace casg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Difference matrices whose estimated condition number exceeds this are
/// treated as singular.
inline constexpr double kSingularCondition = 1e12;

/// Relative slack on the ‖S‖₂ ≤ h feasibility test; optimal sample sets sit
/// exactly on the boundary.
inline constexpr double kRadiusSlack = 1e-12;

/// The d+1 evaluation points {x0, x1, ..., xd}.
class SampleSet {
 public:
  /// Throws InvalidArgument unless `points` holds exactly d vectors of
  /// dimension d = base.size().
  SampleSet(Vec base, std::vector<Vec> points);

  /// x_i = x0 + column i of `differences`.
  static SampleSet from_differences(const Vec& base, const Mat& differences);

  int dim() const { return static_cast<int>(base_.size()); }
  const Vec& base() const { return base_; }
  const std::vector<Vec>& points() const { return points_; }
  /// Point i in 0..d, where 0 is the base point.
  const Vec& point(int i) const { return i == 0 ? base_ : points_[i - 1]; }

 private:
  Vec base_;
  std::vector<Vec> points_;
};

/// S with column j equal to x_j − x0. Holds an LU factorization of S that all
/// solves go through; S is never inverted explicitly.
class DifferenceMatrix {
 public:
  explicit DifferenceMatrix(Mat s);

  const Mat& matrix() const { return s_; }
  int dim() const { return static_cast<int>(s_.rows()); }

  /// Estimated 1-norm condition number; +inf for exactly singular S.
  double condition_estimate() const { return condition_; }
  bool singular() const { return !(condition_ <= kSingularCondition); }

  double spectral_norm() const;

  /// S^{-T} b. Throws SingularDifferenceMatrix.
  Vec solve_transpose(const Vec& b) const;
  /// ‖S^{-1}‖_F².
  double inverse_frobenius_sq() const;

 private:
  void require_invertible() const;

  Mat s_;
  std::shared_ptr<const Eigen::PartialPivLU<Mat>> lu_;
  double condition_;
};

DifferenceMatrix difference_matrix(const SampleSet& sample);

/// Symmetric curvature H together with its sorted eigen-decomposition
/// H = R diag(D) Rᵀ (D increasing), the noise level and the radius bound.
class CurvatureSpec {
 public:
  CurvatureSpec(Mat hessian, double sigma, double h);

  static CurvatureSpec from_diagonal(const Vec& d, double sigma, double h);

  int dim() const { return static_cast<int>(hessian_.rows()); }
  const Mat& hessian() const { return hessian_; }
  const Mat& rotation() const { return rotation_; }
  const Vec& eigenvalues() const { return eigenvalues_; }
  double sigma() const { return sigma_; }
  double h() const { return h_; }

 private:
  Mat hessian_;
  Mat rotation_;
  Vec eigenvalues_;
  double sigma_;
  double h_;
};

/// Append-only list of (x, noisy value, step) records, steps strictly
/// increasing.
class EvaluationHistory {
 public:
  struct Record {
    Vec x;
    double y = 0.0;
    std::uint64_t step = 0;
  };

  EvaluationHistory() = default;

  /// Appends with step = last step + 1 (or 1 for an empty history).
  void append(const Vec& x, double y);
  /// Throws InvalidArgument if `step` does not exceed the last step or the
  /// dimension differs from earlier records.
  void append(const Vec& x, double y, std::uint64_t step);
  /// Appends every record of `other` in order, renumbering steps.
  void extend(const EvaluationHistory& other);

  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  int dim() const { return records_.empty() ? 0 : static_cast<int>(records_.front().x.size()); }
  std::uint64_t last_step() const { return records_.empty() ? 0 : records_.back().step; }

 private:
  std::vector<Record> records_;
};

Vec simplex_gradient(const DifferenceMatrix& s, const Vec& delta_f);

/// σ²‖S^{-1}‖_F² + σ²‖S^{-T}𝟏‖₂².
double noise_error(const DifferenceMatrix& s, double sigma);

/// ¼‖S^{-T}[s_iᵀ H s_i]_i‖₂².
double approximation_error(const DifferenceMatrix& s, const Mat& hessian);

/// AE + NE when S is invertible and ‖S‖₂ ≤ h(1 + kRadiusSlack); +inf otherwise.
double objective(const DifferenceMatrix& s, const CurvatureSpec& spec);

using NoisyFunction = std::function<double(const Vec&)>;
using GradientEstimator = std::function<Vec(const NoisyFunction&, const Vec&)>;

struct MseEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean and standard error of ‖ĝ − ∇f(x0)‖² over `trials` runs of
/// `estimator`, each run seeing f + N(0, σ²) noise from its own stream
/// derived from (seed, trial).
MseEstimate mse_monte_carlo(const GradientEstimator& estimator,
                            const std::function<double(const Vec&)>& f,
                            double sigma, const Vec& true_gradient,
                            const Vec& x0, int trials, std::uint64_t seed);

}  // namespace casg
