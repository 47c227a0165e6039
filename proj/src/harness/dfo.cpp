#include "casg/harness/dfo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "casg/baselines.hpp"
#include "casg/casg.hpp"
#include "casg/ecasg.hpp"
#include "casg/error.hpp"
#include "casg/global_model.hpp"
#include "casg/harness/parallel.hpp"
#include "casg/harness/reference.hpp"

namespace casg::harness {

namespace {

// Sample-set design needs σ > 0; a noiseless oracle is designed for as if it
// carried round-off-sized noise.
constexpr double kDesignSigmaFloor = 1e-14;

enum class Kind { Casg, Ecasg, Fd, Cd, GlobalGrad };

struct Method {
  Kind kind;
  bool model;
};

Method parse_method(const std::string& name) {
  static const std::map<std::string, Method> table{
      {"casg_exact", {Kind::Casg, false}}, {"ecasg_exact", {Kind::Ecasg, false}},
      {"fd_exact", {Kind::Fd, false}},     {"casg_rbf", {Kind::Casg, true}},
      {"ecasg_rbf", {Kind::Ecasg, true}},  {"fd_rbf", {Kind::Fd, true}},
      {"cd", {Kind::Cd, false}},           {"global_grad", {Kind::GlobalGrad, true}},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw Error(ErrorKind::Config, "unknown method '" + name + "'");
  return it->second;
}

Kind resolve(Kind k, int dim) {
  if (k == Kind::Casg && !is_power_of_two(dim)) return Kind::Ecasg;
  return k;
}

EstimatorKind to_estimator(Kind k) {
  switch (k) {
    case Kind::Casg: return EstimatorKind::Casg;
    case Kind::Ecasg: return EstimatorKind::Ecasg;
    case Kind::Fd: return EstimatorKind::Fd;
    case Kind::GlobalGrad:
    case Kind::Cd: break;
  }
  return EstimatorKind::GlobalGrad;
}

GradientSample from_estimate(GradientEstimate est) {
  GradientSample gs;
  gs.gradient = std::move(est.gradient);
  if (!est.evaluations.empty()) gs.value = est.evaluations.records().front().y;
  return gs;
}

}  // namespace

const std::vector<std::string>& dfo_method_names() {
  static const std::vector<std::string> names{"casg_exact", "ecasg_exact", "fd_exact",
                                              "casg_rbf",   "ecasg_rbf",   "fd_rbf",
                                              "cd",         "global_grad"};
  return names;
}

bool is_model_method(const std::string& method) { return parse_method(method).model; }

double RunRecord::final_value() const { return trace.empty() ? initial_value : trace.back().value; }

std::uint64_t run_seed(std::uint64_t root, std::size_t problem, std::size_t h_index, int run) {
  return derive_seed(derive_seed(derive_seed(root, problem), h_index), static_cast<std::uint64_t>(run));
}

RunRecord dfo_single(const Problem& problem, const std::string& method_name, double h, int run,
                     std::uint64_t seed, const DfoConfig& cfg) {
  RunRecord rec;
  rec.problem = problem.name;
  rec.method = method_name;
  rec.h = h;
  rec.sigma = cfg.sigma;
  rec.run = run;
  rec.seed = seed;
  rec.dim = problem.dim;
  const int d = problem.dim;
  try {
    const Method method = parse_method(method_name);
    const Kind kind = resolve(method.kind, d);
    const double design_sigma = std::max(cfg.sigma, kDesignSigmaFloor);
    NoisyOracle oracle(problem, cfg.sigma, derive_seed(seed, 0));
    Rng init_rng(derive_seed(seed, 1));
    rec.initial_value = problem.eval(problem.start);

    EvaluationHistory history;
    if (method.model) {
      const int n_init = cfg.init_points_per_dim * d;
      for (int i = 0; i < n_init; ++i) {
        Vec x(d);
        for (int j = 0; j < d; ++j) {
          x(j) = problem.start(j) + init_rng.uniform(-cfg.init_half_width, cfg.init_half_width);
        }
        history.append(x, oracle(x));
      }
    }
    rec.init_evaluations = oracle.evaluations();
    const std::uint64_t init = rec.init_evaluations;

    const NoisyFunction f = [&](const Vec& x) { return oracle(x); };
    const FilterPolicy policy = FilterPolicy::standard(d);

    LbfgsProblem pb;
    pb.dim = d;
    pb.sigma = cfg.sigma;
    pb.exact = problem.eval;
    pb.evaluations = [&] { return oracle.evaluations() - init; };
    pb.evaluation_offset = cfg.include_init_cost ? init : 0;
    pb.noisy = [&](const Vec& x) {
      const double y = oracle(x);
      if (method.model && cfg.admit_line_search) history.append(x, y);
      return y;
    };
    pb.gradient = [&](const Vec& x) -> GradientSample {
      if (kind == Kind::Cd) {
        GradientSample gs;
        gs.gradient = cd_estimate(f, x, h).gradient;
        return gs;
      }
      if (method.model) {
        FrameworkResult fr = framework_step(history, policy, cfg.smoothing, to_estimator(kind),
                                            design_sigma, h, f, x);
        GradientSample gs;
        if (kind != Kind::GlobalGrad) gs.value = fr.history.records()[history.size()].y;
        gs.gradient = std::move(fr.gradient);
        history = std::move(fr.history);
        return gs;
      }
      const Mat hess = problem.hessian ? problem.hessian(x)
                                       : central_hessian(problem.eval, x, cfg.exact_hessian_step);
      const CurvatureSpec spec(hess, design_sigma, h);
      switch (kind) {
        case Kind::Casg: return from_estimate(fd_estimate(f, casg_sample_set(spec, x).first));
        case Kind::Ecasg: return from_estimate(fd_estimate(f, ecasg_sample_set(spec, x).sample));
        default: return from_estimate(fd_estimate(f, fd_sample_set(spec, x).first));
      }
    };

    LbfgsResult res = lbfgs(pb, problem.start, cfg.lbfgs);
    rec.trace = std::move(res.trace);
    rec.gradient_estimates = res.gradient_estimates;
    rec.gradient_evaluations = res.gradient_evaluations;
    rec.line_search_evaluations = res.line_search_evaluations;
    rec.stop_reason = res.stop_reason;
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
    rec.stop_reason = "error";
  }
  return rec;
}

std::vector<RunRecord> dfo_run(const DfoConfig& cfg, int threads) {
  if (cfg.problems.empty()) throw Error(ErrorKind::Config, "problem list is empty");
  if (cfg.methods.empty()) throw Error(ErrorKind::Config, "method list is empty");
  if (cfg.h_values.empty()) throw Error(ErrorKind::Config, "h list is empty");
  if (cfg.runs < 1) throw Error(ErrorKind::Config, "runs must be >= 1");
  for (const auto& m : cfg.methods) parse_method(m);
  for (double h : cfg.h_values) {
    if (!(h > 0.0)) throw Error(ErrorKind::Config, "h values must be positive");
  }

  struct Task {
    std::size_t p, m, hi;
    int run;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < cfg.problems.size(); ++p) {
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      for (std::size_t hi = 0; hi < cfg.h_values.size(); ++hi) {
        for (int r = 0; r < cfg.runs; ++r) tasks.push_back({p, m, hi, r});
      }
    }
  }
  std::vector<RunRecord> out(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const Task& t = tasks[i];
    out[i] = dfo_single(cfg.problems[t.p], cfg.methods[t.m], cfg.h_values[t.hi], t.run,
                        run_seed(cfg.seed, t.p, t.hi, t.run), cfg);
  });
  return out;
}

std::vector<RunRecord> select_best_h(const std::vector<RunRecord>& records) {
  // (problem, method) -> ordered list of h with sums of final values
  std::map<std::pair<std::string, std::string>, std::vector<std::tuple<double, double, int>>> stats;
  for (const auto& r : records) {
    auto& v = stats[{r.problem, r.method}];
    auto it = std::find_if(v.begin(), v.end(), [&](const auto& e) { return std::get<0>(e) == r.h; });
    if (it == v.end()) {
      v.emplace_back(r.h, r.final_value(), 1);
    } else {
      std::get<1>(*it) += r.final_value();
      std::get<2>(*it) += 1;
    }
  }
  std::map<std::pair<std::string, std::string>, double> best_h;
  for (const auto& [key, v] : stats) {
    double best = kInfinity;
    double chosen = std::get<0>(v.front());
    for (const auto& [h, sum, n] : v) {
      const double mean = sum / n;
      if (mean < best) {
        best = mean;
        chosen = h;
      }
    }
    best_h[key] = chosen;
  }
  std::vector<RunRecord> out;
  for (const auto& r : records) {
    if (best_h.at({r.problem, r.method}) == r.h) out.push_back(r);
  }
  return out;
}

}  // namespace casg::harness
