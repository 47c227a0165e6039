#include "casg/global_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "casg/baselines.hpp"
#include "casg/casg.hpp"
#include "casg/ecasg.hpp"
#include "casg/error.hpp"

namespace casg {

namespace {

constexpr double kMaxFitCondition = 1e12;

}  // namespace

Mat RbfModel::centers() const {
  return (centers_ * scale_).rowwise() + shift_.transpose();
}

Vec RbfModel::weights() const { return weights_ / (scale_ * scale_ * scale_); }

Vec RbfModel::tail() const {
  const int d = dim();
  Vec out(d + 1);
  const Vec lin = tail_.tail(d) / scale_;
  out(0) = tail_(0) - lin.dot(shift_);
  out.tail(d) = lin;
  return out;
}

double RbfModel::value(const Vec& x) const {
  const Vec z = (x - shift_) / scale_;
  double v = tail_(0) + tail_.tail(dim()).dot(z);
  for (int i = 0; i < size(); ++i) {
    const double r = (z - centers_.row(i).transpose()).norm();
    v += weights_(i) * r * r * r;
  }
  return v;
}

Vec RbfModel::gradient(const Vec& x) const {
  const int d = dim();
  const Vec z = (x - shift_) / scale_;
  Vec g = tail_.tail(d);
  for (int i = 0; i < size(); ++i) {
    const Vec u = z - centers_.row(i).transpose();
    const double r = u.norm();
    g += (3.0 * weights_(i) * r) * u;
  }
  return g / scale_;
}

Mat RbfModel::hessian(const Vec& x) const {
  const int d = dim();
  const Vec z = (x - shift_) / scale_;
  Mat hs = Mat::Zero(d, d);
  double diag = 0.0;
  Vec u(d);
  for (int i = 0; i < size(); ++i) {
    u = z - centers_.row(i).transpose();
    const double r = u.norm();
    if (r == 0.0) continue;  // r³ has zero Hessian at its center
    diag += weights_(i) * r;
    const double c = weights_(i) / r;
    for (int a = 0; a < d; ++a) {
      const double ca = c * u(a);
      for (int b = a; b < d; ++b) hs(a, b) += ca * u(b);
    }
  }
  for (int a = 0; a < d; ++a) {
    hs(a, a) += diag;
    for (int b = a + 1; b < d; ++b) hs(b, a) = hs(a, b);
  }
  return hs * (3.0 / (scale_ * scale_));
}

RbfModel fit_rbf(const EvaluationHistory& history, double smoothing) {
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
    throw Error(ErrorKind::InvalidArgument, "smoothing must be finite and >= 0");
  }
  const int n = static_cast<int>(history.size());
  const int d = history.dim();
  if (d == 0 || n < d + 2) {
    throw Error(ErrorKind::DegenerateGeometry,
                "need at least d+2 points to fit, have " + std::to_string(n));
  }
  RbfModel model;
  Mat x(n, d);
  Vec y(n);
  for (int i = 0; i < n; ++i) {
    x.row(i) = history.records()[i].x.transpose();
    y(i) = history.records()[i].y;
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw Error(ErrorKind::NonFiniteInput, "history contains non-finite values");
  }
  model.shift_ = x.colwise().mean().transpose();
  const Mat centered = x.rowwise() - model.shift_.transpose();
  model.scale_ = centered.cwiseAbs().maxCoeff();
  if (!(model.scale_ > 0.0)) throw Error(ErrorKind::DegenerateGeometry, "all points coincide");
  model.centers_ = centered / model.scale_;
  model.smoothing_ = smoothing;

  // r³ scales with scale³, so the ridge is rescaled to keep the fit identical
  // to the one in problem coordinates.
  const double ridge = smoothing / (model.scale_ * model.scale_ * model.scale_);
  const int m = n + d + 1;
  Mat a = Mat::Zero(m, m);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double r = (model.centers_.row(i) - model.centers_.row(j)).norm();
      a(i, j) = a(j, i) = r * r * r;
    }
    a(i, i) = ridge;
    a(i, n) = a(n, i) = 1.0;
    for (int k = 0; k < d; ++k) a(i, n + 1 + k) = a(n + 1 + k, i) = model.centers_(i, k);
  }
  Vec rhs = Vec::Zero(m);
  rhs.head(n) = y;

  // The LU estimate can miss a rank-deficient tail block (e.g. collinear
  // points in 2-D), so the affine part is checked on its own.
  const Eigen::JacobiSVD<Mat> tail_svd(a.block(0, n, n, d + 1));
  const Vec& tail_sv = tail_svd.singularValues();
  if (!(tail_sv(d) * kMaxFitCondition > tail_sv(0))) {
    throw Error(ErrorKind::DegenerateGeometry, "points do not determine an affine function");
  }

  // A ridge far above the kernel entries (heavy smoothing of tightly clustered
  // points) inflates the condition number like ridge². The symmetric scaling
  // diag(ridge^{-1/2} I, ridge^{1/2} I) brings the kernel block back to O(1).
  const double eq = std::sqrt(std::max(1.0, ridge));
  Vec scaling(m);
  scaling.head(n).setConstant(1.0 / eq);
  scaling.tail(d + 1).setConstant(eq);
  a = scaling.asDiagonal() * a * scaling.asDiagonal();
  rhs = scaling.asDiagonal() * rhs;

  Eigen::PartialPivLU<Mat> lu(a);
  const double rc = lu.rcond();
  if (!(rc > 1.0 / kMaxFitCondition)) {
    throw Error(ErrorKind::DegenerateGeometry,
                "interpolation system is ill-conditioned (rcond " + std::to_string(rc) + ")");
  }
  const Vec sol = scaling.asDiagonal() * lu.solve(rhs);
  if (!sol.allFinite()) throw Error(ErrorKind::DegenerateGeometry, "interpolation solve failed");
  model.weights_ = sol.head(n);
  model.tail_ = sol.tail(d + 1);
  return model;
}

QueryResult model_query(const RbfModel& model, const Vec& x, QueryOrder order) {
  switch (order) {
    case QueryOrder::Value: return model.value(x);
    case QueryOrder::Gradient: return model.gradient(x);
    case QueryOrder::Hessian: return model.hessian(x);
  }
  return model.value(x);
}

FilterPolicy FilterPolicy::standard(int dim) {
  return FilterPolicy{Mode::NearestK, std::min(100 * dim, 1000), 1e-9};
}

EvaluationHistory filter_history(const EvaluationHistory& history, const FilterPolicy& policy,
                                 const Vec& x0) {
  const auto& recs = history.records();
  const int n = static_cast<int>(recs.size());
  const int d = history.dim();
  if (policy.mode != FilterPolicy::Mode::All && policy.k < d + 1) {
    throw Error(ErrorKind::InvalidArgument, "filter k must be at least d+1");
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  int limit = n;
  switch (policy.mode) {
    case FilterPolicy::Mode::All: break;
    case FilterPolicy::Mode::LatestK:
      std::reverse(order.begin(), order.end());
      limit = policy.k;
      break;
    case FilterPolicy::Mode::NearestK: {
      std::vector<double> dist(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) dist[i] = (recs[i].x - x0).squaredNorm();
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] < dist[b]; });
      limit = policy.k;
      break;
    }
  }
  const double r2 = policy.dedup_radius * policy.dedup_radius;
  std::vector<int> chosen;
  chosen.reserve(static_cast<std::size_t>(std::min(limit, n)));
  for (int idx : order) {
    if (static_cast<int>(chosen.size()) >= limit) break;
    bool dup = false;
    if (policy.dedup_radius > 0.0) {
      for (int c : chosen) {
        if ((recs[c].x - recs[idx].x).squaredNorm() <= r2) {
          dup = true;
          break;
        }
      }
    }
    if (!dup) chosen.push_back(idx);
  }
  std::sort(chosen.begin(), chosen.end());
  EvaluationHistory out;
  for (int c : chosen) out.append(recs[c].x, recs[c].y, recs[c].step);
  return out;
}

FrameworkResult framework_step(const EvaluationHistory& history, const FilterPolicy& policy,
                               double smoothing, EstimatorKind estimator, double sigma, double h,
                               const NoisyFunction& f, const Vec& x0) {
  const EvaluationHistory filtered = filter_history(history, policy, x0);
  const RbfModel model = fit_rbf(filtered, smoothing);

  FrameworkResult out;
  out.hessian = model.hessian(x0);
  out.history = history;
  const int d = static_cast<int>(x0.size());

  if (estimator == EstimatorKind::GlobalGrad) {
    out.gradient = model.gradient(x0);
    out.estimate_evaluations = 0;
    const SampleSet stencil =
        SampleSet::from_differences(x0, Mat::Identity(d, d) * kGlobalGradStencil);
    for (int i = 0; i <= d; ++i) {
      const Vec& p = stencil.point(i);
      out.history.append(p, f(p));
    }
    out.stencil_evaluations = d + 1;
    return out;
  }

  const CurvatureSpec spec(out.hessian, sigma, h);
  GradientEstimate est;
  switch (estimator) {
    case EstimatorKind::Casg: est = fd_estimate(f, casg_sample_set(spec, x0).first); break;
    case EstimatorKind::Ecasg: est = fd_estimate(f, ecasg_sample_set(spec, x0).sample); break;
    case EstimatorKind::Fd: est = fd_estimate(f, fd_sample_set(spec, x0).first); break;
    case EstimatorKind::GlobalGrad: break;
  }
  out.gradient = std::move(est.gradient);
  out.estimate_evaluations = static_cast<int>(est.evaluations.size());
  out.history.extend(est.evaluations);
  return out;
}

}  // namespace casg
