#include "casg/simplex.hpp"

#include <cmath>
#include <string>

#include "casg/error.hpp"
#include "casg/rng.hpp"

namespace casg {

namespace {

bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace

SampleSet::SampleSet(Vec base, std::vector<Vec> points)
    : base_(std::move(base)), points_(std::move(points)) {
  const auto d = base_.size();
  if (d == 0) throw Error(ErrorKind::InvalidArgument, "sample set needs dimension >= 1");
  if (static_cast<Eigen::Index>(points_.size()) != d) {
    throw Error(ErrorKind::InvalidArgument,
                "sample set must hold d+1 points, got " + std::to_string(points_.size() + 1) +
                    " for d=" + std::to_string(d));
  }
  for (const auto& p : points_) {
    if (p.size() != d) throw Error(ErrorKind::InvalidArgument, "sample point dimension mismatch");
  }
}

SampleSet SampleSet::from_differences(const Vec& base, const Mat& differences) {
  if (differences.rows() != base.size() || differences.cols() != base.size()) {
    throw Error(ErrorKind::InvalidArgument, "difference matrix must be d x d");
  }
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(base.size()));
  for (Eigen::Index j = 0; j < differences.cols(); ++j) pts.emplace_back(base + differences.col(j));
  return SampleSet(base, std::move(pts));
}

DifferenceMatrix::DifferenceMatrix(Mat s) : s_(std::move(s)), condition_(kInfinity) {
  if (s_.rows() != s_.cols() || s_.rows() == 0) {
    throw Error(ErrorKind::InvalidArgument, "difference matrix must be square and non-empty");
  }
  if (!all_finite(s_)) return;
  auto lu = std::make_shared<Eigen::PartialPivLU<Mat>>(s_);
  const auto& u = lu->matrixLU();
  bool zero_pivot = false;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    if (!(std::abs(u(i, i)) > 0.0)) zero_pivot = true;
  }
  if (!zero_pivot) {
    const double rc = lu->rcond();
    if (rc > 0.0 && std::isfinite(rc)) condition_ = 1.0 / rc;
  }
  lu_ = std::move(lu);
}

double DifferenceMatrix::spectral_norm() const {
  if (!all_finite(s_)) return kInfinity;
  Eigen::BDCSVD<Mat> svd(s_);
  return svd.singularValues()(0);
}

void DifferenceMatrix::require_invertible() const {
  if (singular()) {
    throw Error(ErrorKind::SingularDifferenceMatrix,
                "difference matrix is numerically singular (condition estimate " +
                    std::to_string(condition_) + ")");
  }
}

Vec DifferenceMatrix::solve_transpose(const Vec& b) const {
  require_invertible();
  if (b.size() != s_.rows()) throw Error(ErrorKind::InvalidArgument, "rhs dimension mismatch");
  return lu_->transpose().solve(b);
}

double DifferenceMatrix::inverse_frobenius_sq() const {
  require_invertible();
  const Mat inv = lu_->solve(Mat::Identity(s_.rows(), s_.cols()));
  return inv.squaredNorm();
}

DifferenceMatrix difference_matrix(const SampleSet& sample) {
  const int d = sample.dim();
  Mat s(d, d);
  for (int j = 0; j < d; ++j) s.col(j) = sample.points()[j] - sample.base();
  return DifferenceMatrix(std::move(s));
}

CurvatureSpec::CurvatureSpec(Mat hessian, double sigma, double h)
    : hessian_(std::move(hessian)), sigma_(sigma), h_(h) {
  if (hessian_.rows() != hessian_.cols() || hessian_.rows() == 0) {
    throw Error(ErrorKind::InvalidArgument, "curvature matrix must be square and non-empty");
  }
  if (!hessian_.allFinite() || !std::isfinite(sigma) || !std::isfinite(h)) {
    throw Error(ErrorKind::NonFiniteInput, "curvature spec has non-finite entries");
  }
  if (sigma < 0.0) throw Error(ErrorKind::InvalidArgument, "sigma must be >= 0");
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "h must be > 0");
  const double scale = 1.0 + hessian_.cwiseAbs().maxCoeff();
  if ((hessian_ - hessian_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw Error(ErrorKind::InvalidArgument, "curvature matrix is not symmetric");
  }
  hessian_ = 0.5 * (hessian_ + hessian_.transpose());
  // Eigen returns eigenvalues in increasing order.
  Eigen::SelfAdjointEigenSolver<Mat> eig(hessian_);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorKind::NonFiniteInput, "eigen-decomposition did not converge");
  }
  eigenvalues_ = eig.eigenvalues();
  rotation_ = eig.eigenvectors();
}

CurvatureSpec CurvatureSpec::from_diagonal(const Vec& d, double sigma, double h) {
  return CurvatureSpec(d.asDiagonal().toDenseMatrix(), sigma, h);
}

void EvaluationHistory::append(const Vec& x, double y) { append(x, y, last_step() + 1); }

void EvaluationHistory::append(const Vec& x, double y, std::uint64_t step) {
  if (step == 0 || (!records_.empty() && step <= records_.back().step)) {
    throw Error(ErrorKind::InvalidArgument,
                "history steps must be positive and strictly increasing (got " +
                    std::to_string(step) + " after " + std::to_string(last_step()) + ")");
  }
  if (!records_.empty() && x.size() != records_.front().x.size()) {
    throw Error(ErrorKind::InvalidArgument, "history record dimension mismatch");
  }
  records_.push_back(Record{x, y, step});
}

void EvaluationHistory::extend(const EvaluationHistory& other) {
  for (const auto& r : other.records()) append(r.x, r.y);
}

Vec simplex_gradient(const DifferenceMatrix& s, const Vec& delta_f) {
  return s.solve_transpose(delta_f);
}

double noise_error(const DifferenceMatrix& s, double sigma) {
  if (sigma < 0.0) throw Error(ErrorKind::InvalidArgument, "sigma must be >= 0");
  const double fro = s.inverse_frobenius_sq();
  const double ones = s.solve_transpose(Vec::Ones(s.dim())).squaredNorm();
  return sigma * sigma * (fro + ones);
}

double approximation_error(const DifferenceMatrix& s, const Mat& hessian) {
  const Mat& m = s.matrix();
  if (hessian.rows() != m.rows() || hessian.cols() != m.cols()) {
    throw Error(ErrorKind::InvalidArgument, "curvature dimension mismatch");
  }
  const Vec q = (m.transpose() * hessian * m).diagonal();
  return 0.25 * s.solve_transpose(q).squaredNorm();
}

double objective(const DifferenceMatrix& s, const CurvatureSpec& spec) {
  if (s.dim() != spec.dim()) throw Error(ErrorKind::InvalidArgument, "dimension mismatch");
  if (s.singular()) return kInfinity;
  if (s.spectral_norm() > spec.h() * (1.0 + kRadiusSlack)) return kInfinity;
  return approximation_error(s, spec.hessian()) + noise_error(s, spec.sigma());
}

MseEstimate mse_monte_carlo(const GradientEstimator& estimator,
                            const std::function<double(const Vec&)>& f, double sigma,
                            const Vec& true_gradient, const Vec& x0, int trials,
                            std::uint64_t seed) {
  if (trials < 2) throw Error(ErrorKind::InvalidArgument, "mse_monte_carlo needs >= 2 trials");
  // Welford accumulation, trials in index order.
  double mean = 0.0;
  double m2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    NoisyFunction noisy = [&](const Vec& x) { return f(x) + sigma * rng.normal(); };
    Vec g;
    try {
      g = estimator(noisy, x0);
    } catch (const Error& e) {
      throw e.with_context("trial " + std::to_string(t));
    }
    const double err = (g - true_gradient).squaredNorm();
    const double delta = err - mean;
    mean += delta / (t + 1);
    m2 += delta * (err - mean);
  }
  const double var = m2 / (trials - 1);
  return {mean, std::sqrt(var / trials)};
}

}  // namespace casg
