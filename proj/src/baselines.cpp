#include "casg/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "casg/error.hpp"

namespace casg {

std::pair<SampleSet, FdSteps> fd_sample_set(const CurvatureSpec& spec, const Vec& x0) {
  const int n = spec.dim();
  if (x0.size() != n) throw Error(ErrorKind::InvalidArgument, "x0 dimension mismatch");
  if (!x0.allFinite()) throw Error(ErrorKind::NonFiniteInput, "x0 has non-finite entries");
  const double sigma = spec.sigma();
  const double h = spec.h();
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
  FdSteps steps{Vec(n)};
  for (int i = 0; i < n; ++i) {
    const double hii = spec.hessian()(i, i);
    const double t = hii == 0.0 ? h : std::pow(8.0 * sigma * sigma / (hii * hii), 0.25);
    steps.t(i) = std::min(h, t);
    if (!(steps.t(i) > 0.0) || !std::isfinite(steps.t(i))) {
      throw Error(ErrorKind::NonFiniteInput, "forward-difference step underflowed");
    }
  }
  SampleSet sample = SampleSet::from_differences(x0, steps.t.asDiagonal().toDenseMatrix());
  return {std::move(sample), std::move(steps)};
}

GradientEstimate cd_estimate(const NoisyFunction& f, const Vec& x0, double h_step) {
  if (!(h_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "central-difference step must be positive");
  const auto n = x0.size();
  GradientEstimate out{Vec(n), {}};
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec xp = x0;
    Vec xm = x0;
    xp(i) += h_step;
    xm(i) -= h_step;
    const double fp = f(xp);
    out.evaluations.append(xp, fp);
    const double fm = f(xm);
    out.evaluations.append(xm, fm);
    out.gradient(i) = (fp - fm) / (2.0 * h_step);
  }
  return out;
}

GradientEstimate fd_estimate(const NoisyFunction& f, const SampleSet& sample) {
  const DifferenceMatrix s = difference_matrix(sample);
  if (s.singular()) {
    throw Error(ErrorKind::SingularDifferenceMatrix, "sample set does not span the space");
  }
  const int n = sample.dim();
  GradientEstimate out;
  const double f0 = f(sample.base());
  out.evaluations.append(sample.base(), f0);
  Vec delta(n);
  for (int i = 0; i < n; ++i) {
    const double fi = f(sample.points()[i]);
    out.evaluations.append(sample.points()[i], fi);
    delta(i) = fi - f0;
  }
  out.gradient = simplex_gradient(s, delta);
  return out;
}

}  // namespace casg
