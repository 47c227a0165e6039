#include "casg/harness/reference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace casg::harness {

namespace {

// One column of a Richardson table per coordinate, extrapolated in step².
template <class Cd>
RichardsonResult richardson(Cd&& cd, const Vec& x, int out_size, const RichardsonOptions& o) {
  const auto d = x.size();
  Vec steps(d);
  for (Eigen::Index i = 0; i < d; ++i) steps(i) = o.initial_step * std::max(1.0, std::abs(x(i)));
  std::vector<Mat> table;  // table[k] holds extrapolation level k of the latest row
  RichardsonResult res;
  res.value = Vec::Zero(out_size);
  Mat prev_row;
  for (int level = 0; level < o.max_levels; ++level) {
    Mat row(out_size, level + 1);
    row.col(0) = cd(steps / std::pow(2.0, level));
    double factor = 4.0;
    for (int k = 1; k <= level; ++k) {
      row.col(k) = row.col(k - 1) + (row.col(k - 1) - prev_row.col(k - 1)) / (factor - 1.0);
      factor *= 4.0;
    }
    res.levels = level + 1;
    if (level > 0) {
      const Vec best = row.col(level);
      const Vec before = prev_row.col(level - 1);
      const double scale = std::max(1.0, best.cwiseAbs().maxCoeff());
      res.last_change = (best - before).cwiseAbs().maxCoeff() / scale;
      res.value = best;
      if (res.last_change <= o.tolerance) {
        res.converged = true;
        return res;
      }
    } else {
      res.value = row.col(0);
    }
    prev_row = std::move(row);
  }
  return res;
}

}  // namespace

RichardsonResult richardson_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                                     const RichardsonOptions& options) {
  const auto d = x.size();
  auto cd = [&](const Vec& steps) {
    Vec g(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      Vec xp = x, xm = x;
      xp(i) += steps(i);
      xm(i) -= steps(i);
      g(i) = (f(xp) - f(xm)) / (2.0 * steps(i));
    }
    return g;
  };
  return richardson(cd, x, static_cast<int>(d), options);
}

Mat richardson_hessian(const std::function<Vec(const Vec&)>& grad, const Vec& x,
                       const RichardsonOptions& options) {
  const auto d = x.size();
  auto cd = [&](const Vec& steps) {
    Vec flat(d * d);
    for (Eigen::Index j = 0; j < d; ++j) {
      Vec xp = x, xm = x;
      xp(j) += steps(j);
      xm(j) -= steps(j);
      flat.segment(j * d, d) = (grad(xp) - grad(xm)) / (2.0 * steps(j));
    }
    return flat;
  };
  const RichardsonResult r = richardson(cd, x, static_cast<int>(d * d), options);
  const Mat h = Eigen::Map<const Mat>(r.value.data(), d, d);
  return 0.5 * (h + h.transpose());
}

Vec reference_gradient(const Problem& problem, const Vec& x) {
  if (problem.gradient) return problem.gradient(x);
  return richardson_gradient(problem.eval, x).value;
}

Mat reference_hessian(const Problem& problem, const Vec& x) {
  if (problem.hessian) return problem.hessian(x);
  if (problem.gradient) return richardson_hessian(problem.gradient, x);
  return richardson_hessian([&](const Vec& y) { return reference_gradient(problem, y); }, x);
}

Mat central_hessian(const std::function<double(const Vec&)>& f, const Vec& x, double step) {
  const auto d = x.size();
  Mat h(d, d);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < d; ++i) {
    Vec xp = x, xm = x;
    xp(i) += step;
    xm(i) -= step;
    h(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (step * step);
    for (Eigen::Index j = i + 1; j < d; ++j) {
      Vec pp = x, pm = x, mp = x, mm = x;
      pp(i) += step; pp(j) += step;
      pm(i) += step; pm(j) -= step;
      mp(i) -= step; mp(j) += step;
      mm(i) -= step; mm(j) -= step;
      h(i, j) = h(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step * step);
    }
  }
  return h;
}

}  // namespace casg::harness
