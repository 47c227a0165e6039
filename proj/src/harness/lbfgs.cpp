#include "casg/harness/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "casg/error.hpp"

namespace casg::harness {

namespace {

struct Pair {
  Vec s;
  Vec y;
  double rho;
};

Vec two_loop(const std::deque<Pair>& mem, const Vec& g) {
  Vec q = g;
  std::vector<double> alpha(mem.size());
  for (std::size_t i = mem.size(); i-- > 0;) {
    alpha[i] = mem[i].rho * mem[i].s.dot(q);
    q -= alpha[i] * mem[i].y;
  }
  if (!mem.empty()) {
    const Pair& last = mem.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const double beta = mem[i].rho * mem[i].y.dot(q);
    q += (alpha[i] - beta) * mem[i].s;
  }
  return -q;
}

}  // namespace

LbfgsResult lbfgs(const LbfgsProblem& pb, const Vec& x0, const LbfgsOptions& opt) {
  if (pb.dim <= 0 || x0.size() != pb.dim) throw Error(ErrorKind::InvalidArgument, "lbfgs dimension mismatch");
  if (opt.memory < 1 || opt.max_backtracks < 1 || !(opt.budget > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "invalid lbfgs options");
  }
  LbfgsResult res;
  res.x = x0;
  res.initial_value = pb.exact(x0);
  double best = res.initial_value;
  const double d = pb.dim;
  auto spent = [&] { return pb.evaluation_offset + pb.evaluations(); };
  auto over_budget = [&] { return static_cast<double>(spent()) / d >= opt.budget; };

  auto estimate = [&](const Vec& x) {
    const std::uint64_t before = pb.evaluations();
    GradientSample gs = pb.gradient(x);
    res.gradient_evaluations += pb.evaluations() - before;
    ++res.gradient_estimates;
    return gs;
  };
  auto noisy = [&](const Vec& x) {
    ++res.line_search_evaluations;
    return pb.noisy(x);
  };
  // Trial points where the objective cannot be evaluated (e.g. a diverging
  // simulation) are rejected like points that fail the Armijo test.
  auto trial = [&](const Vec& x) {
    try {
      const double v = noisy(x);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonFiniteState) throw;
      return std::numeric_limits<double>::infinity();
    }
  };

  Vec x = x0;
  GradientSample gs = estimate(x);
  Vec g = gs.gradient;
  double fx = std::isnan(gs.value) ? noisy(x) : gs.value;
  std::deque<Pair> mem;

  for (int it = 0; it < opt.max_iterations; ++it) {
    if (!g.allFinite()) {
      res.stop_reason = "non-finite gradient";
      break;
    }
    if (g.squaredNorm() == 0.0) {
      res.stop_reason = "zero gradient";
      break;
    }
    if (over_budget()) {
      res.stop_reason = "budget";
      break;
    }
    Vec p = two_loop(mem, g);
    if (!(g.dot(p) < 0.0)) {
      mem.clear();
      p = -g;
    }
    double step = mem.empty() ? std::min(1.0, 1.0 / g.cwiseAbs().maxCoeff()) : 1.0;
    const double slope = g.dot(p);
    const double allowance = opt.noise_allowance * pb.sigma;
    bool accepted = false;
    Vec xt;
    double ft = 0.0;
    for (int k = 0; k < opt.max_backtracks; ++k) {
      xt = x + step * p;
      ft = trial(xt);
      if (ft <= fx + opt.armijo * step * slope + allowance) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!mem.empty()) {
        mem.clear();  // retry once along the steepest descent direction
        continue;
      }
      res.stop_reason = "line search failed";
      break;
    }
    const GradientSample next = estimate(xt);
    const Vec s = xt - x;
    const Vec y = next.gradient - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0.0) {
      mem.push_back(Pair{s, y, 1.0 / sy});
      if (static_cast<int>(mem.size()) > opt.memory) mem.pop_front();
    }
    x = xt;
    g = next.gradient;
    fx = std::isnan(next.value) ? ft : next.value;
    best = std::min(best, pb.exact(x));
    res.trace.push_back(TracePoint{spent(), best});
  }
  if (res.stop_reason.empty()) res.stop_reason = "iteration limit";
  res.x = x;
  return res;
}

}  // namespace casg::harness
