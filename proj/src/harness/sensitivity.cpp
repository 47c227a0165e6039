#include "casg/harness/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>

#include "casg/baselines.hpp"
#include "casg/casg.hpp"
#include "casg/ecasg.hpp"
#include "casg/error.hpp"
#include "casg/harness/parallel.hpp"
#include "casg/harness/reference.hpp"

namespace casg::harness {

namespace {

enum class Design { Casg, Ecasg, Fd, Cd, GlobalGrad };

struct Method {
  std::string name;
  Design design;
  bool model;
};

Method parse(const std::string& name) {
  static const std::map<std::string, std::pair<Design, bool>> table{
      {"casg_exact", {Design::Casg, false}}, {"ecasg_exact", {Design::Ecasg, false}},
      {"fd_exact", {Design::Fd, false}},     {"casg_rbf", {Design::Casg, true}},
      {"ecasg_rbf", {Design::Ecasg, true}},  {"fd_rbf", {Design::Fd, true}},
      {"cd", {Design::Cd, false}},           {"global_grad", {Design::GlobalGrad, true}},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw Error(ErrorKind::Config, "unknown method '" + name + "'");
  return {name, it->second.first, it->second.second};
}

DifferenceMatrix design_matrix(Design design, const CurvatureSpec& spec, const Vec& x) {
  if (design == Design::Casg && !is_power_of_two(spec.dim())) design = Design::Ecasg;
  switch (design) {
    case Design::Casg: return casg_sample_set(spec, x).second.s_star;
    case Design::Ecasg: return ecasg_sample_set(spec, x).s;
    default: return difference_matrix(fd_sample_set(spec, x).first);
  }
}

Vec uniform_point(Rng& rng, const Problem& p) {
  Vec x(p.dim);
  for (int j = 0; j < p.dim; ++j) x(j) = rng.uniform(p.lower(j), p.upper(j));
  return x;
}

std::string baseline_for(const Method& m, const std::vector<std::string>& names) {
  auto has = [&](const char* n) { return std::find(names.begin(), names.end(), n) != names.end(); };
  const char* first = m.model ? "casg_rbf" : "casg_exact";
  const char* second = m.model ? "casg_exact" : "casg_rbf";
  if (has(first)) return first;
  if (has(second)) return second;
  return {};
}

}  // namespace

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double simplex_mse(const std::function<double(const Vec&)>& f, const Vec& x, const Vec& true_gradient,
                   const DifferenceMatrix& s, double sigma) {
  const int d = s.dim();
  const double f0 = f(x);
  Vec delta(d);
  for (int i = 0; i < d; ++i) delta(i) = f(x + s.matrix().col(i)) - f0;
  const Vec bias = simplex_gradient(s, delta) - true_gradient;
  return bias.squaredNorm() + noise_error(s, sigma);
}

double cd_mse(const std::function<double(const Vec&)>& f, const Vec& x, const Vec& true_gradient,
              double h, double sigma) {
  const auto d = x.size();
  const NoisyFunction exact = f;
  const Vec g = cd_estimate(exact, x, h).gradient;
  return (g - true_gradient).squaredNorm() + static_cast<double>(d) * sigma * sigma / (2.0 * h * h);
}

SensitivityResult sensitivity_experiment(const SensitivityConfig& cfg, int threads) {
  const Problem& p = cfg.problem;
  if (cfg.methods.empty()) throw Error(ErrorKind::Config, "method list is empty");
  if (cfg.h_values.empty()) throw Error(ErrorKind::Config, "h list is empty");
  if (cfg.points < 1) throw Error(ErrorKind::Config, "points must be >= 1");
  if (!(cfg.sigma > 0.0)) throw Error(ErrorKind::Config, "sigma must be positive");
  for (double h : cfg.h_values) {
    if (!(h > 0.0)) throw Error(ErrorKind::Config, "h values must be positive");
  }
  std::vector<Method> methods;
  bool need_model = false;
  for (const auto& n : cfg.methods) {
    methods.push_back(parse(n));
    need_model = need_model || methods.back().model;
  }
  for (int n : cfg.sweep_sizes) {
    if (n < p.dim + 2 || n > cfg.model_points) {
      throw Error(ErrorKind::Config, "sweep sizes must lie in [d+2, model_points]");
    }
  }

  SensitivityResult result;

  // Global model data: uniform over the domain, noisy values.
  EvaluationHistory data;
  std::optional<RbfModel> model;
  if (need_model || !cfg.sweep_sizes.empty()) {
    NoisyOracle oracle(p, cfg.sigma, derive_seed(cfg.seed, 1));
    Rng rng(derive_seed(cfg.seed, 2));
    for (int i = 0; i < cfg.model_points; ++i) {
      const Vec x = uniform_point(rng, p);
      data.append(x, oracle(x));
    }
    if (need_model) {
      try {
        model = fit_rbf(data, cfg.smoothing);
      } catch (const Error& e) {
        result.failures.push_back(std::string("model fit: ") + e.what());
      }
    }
  }

  std::vector<Vec> points;
  {
    Rng rng(derive_seed(cfg.seed, 3));
    for (int i = 0; i < cfg.points; ++i) points.push_back(uniform_point(rng, p));
  }

  bool need_exact_h = false;
  for (const auto& m : methods) need_exact_h = need_exact_h || (!m.model && m.design != Design::Cd);

  // rows_per_point[i] in method-then-h order
  std::vector<std::vector<SensitivityRow>> per_point(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    const Vec& x = points[i];
    auto& rows = per_point[i];
    Vec g;
    std::optional<Mat> exact_h;
    std::optional<Mat> model_h;
    std::string setup_error;
    try {
      g = reference_gradient(p, x);
      if (need_exact_h) exact_h = reference_hessian(p, x);
      if (model) model_h = model->hessian(x);
    } catch (const std::exception& e) {
      setup_error = e.what();
    }
    for (const auto& m : methods) {
      const std::vector<double> hs =
          m.design == Design::GlobalGrad ? std::vector<double>{0.0} : cfg.h_values;
      for (double h : hs) {
        SensitivityRow row;
        row.point = static_cast<int>(i);
        row.method = m.name;
        row.h = h;
        try {
          if (!setup_error.empty()) throw Error(ErrorKind::NonFiniteState, setup_error);
          if (m.model && !model) throw Error(ErrorKind::DegenerateGeometry, "global model unavailable");
          switch (m.design) {
            case Design::Cd: row.mse = cd_mse(p.eval, x, g, h, cfg.sigma); break;
            case Design::GlobalGrad: row.mse = (model->gradient(x) - g).squaredNorm(); break;
            default: {
              const CurvatureSpec spec(m.model ? *model_h : *exact_h, cfg.sigma, h);
              row.mse = simplex_mse(p.eval, x, g, design_matrix(m.design, spec, x), cfg.sigma);
            }
          }
          if (!std::isfinite(row.mse)) throw Error(ErrorKind::NonFiniteState, "non-finite MSE");
        } catch (const std::exception& e) {
          row.failed = true;
          row.error = e.what();
          row.mse = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(std::move(row));
      }
    }
  });
  for (auto& rows : per_point) {
    for (auto& r : rows) {
      if (r.failed) {
        result.failures.push_back("point " + std::to_string(r.point) + " " + r.method + ": " + r.error);
      }
      result.rows.push_back(std::move(r));
    }
  }

  // Per method: best h by median MSE, then ratios against the baseline.
  std::map<std::string, std::map<double, std::vector<double>>> by_h;  // method -> h -> per-point mse (NaN on failure)
  for (const auto& r : result.rows) {
    auto& v = by_h[r.method][r.h];
    v.resize(points.size(), std::numeric_limits<double>::quiet_NaN());
    v[static_cast<std::size_t>(r.point)] = r.mse;
  }
  auto finite = [](const std::vector<double>& v) {
    std::vector<double> out;
    for (double x : v) {
      if (std::isfinite(x)) out.push_back(x);
    }
    return out;
  };
  std::map<std::string, double> best_h;
  for (const auto& m : methods) {
    double best_med = kInfinity;
    double chosen = by_h[m.name].begin()->first;
    for (double h : m.design == Design::GlobalGrad ? std::vector<double>{0.0} : cfg.h_values) {
      const double med = quantile(finite(by_h[m.name][h]), 0.5);
      if (std::isfinite(med) && med < best_med) {
        best_med = med;
        chosen = h;
      }
    }
    best_h[m.name] = chosen;
  }
  for (const auto& m : methods) {
    MethodSummary s;
    s.method = m.name;
    s.best_h = best_h[m.name];
    const auto& v = by_h[m.name][s.best_h];
    const auto ok = finite(v);
    s.failures = static_cast<int>(v.size() - ok.size());
    s.median = quantile(ok, 0.5);
    s.q25 = quantile(ok, 0.25);
    s.q75 = quantile(ok, 0.75);
    s.baseline = baseline_for(m, cfg.methods);
    s.median_log2_ratio = std::numeric_limits<double>::quiet_NaN();
    if (!s.baseline.empty()) {
      const auto& b = by_h[s.baseline][best_h[s.baseline]];
      std::vector<double> ratios;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (std::isfinite(v[i]) && std::isfinite(b[i]) && v[i] > 0.0 && b[i] > 0.0) {
          ratios.push_back(std::log2(v[i] / b[i]));
        }
      }
      s.median_log2_ratio = quantile(ratios, 0.5);
    }
    result.summary.push_back(s);
  }

  // Error against the amount of history used by the model.
  for (int n : cfg.sweep_sizes) {
    EvaluationHistory sub;
    for (int i = 0; i < n; ++i) sub.append(data.records()[i].x, data.records()[i].y, data.records()[i].step);
    std::optional<RbfModel> m;
    try {
      m = fit_rbf(sub, cfg.smoothing);
    } catch (const Error& e) {
      result.failures.push_back("sweep n=" + std::to_string(n) + ": " + e.what());
      continue;
    }
    const double h = best_h.count("casg_rbf") ? best_h["casg_rbf"] : cfg.h_values.front();
    std::vector<double> casg_err(points.size()), global_err(points.size());
    parallel_for(points.size(), threads, [&](std::size_t i) {
      const Vec& x = points[i];
      const Vec g = reference_gradient(p, x);
      global_err[i] = (m->gradient(x) - g).squaredNorm();
      try {
        const CurvatureSpec spec(m->hessian(x), cfg.sigma, h);
        casg_err[i] = simplex_mse(p.eval, x, g, design_matrix(Design::Casg, spec, x), cfg.sigma);
      } catch (const Error&) {
        casg_err[i] = std::numeric_limits<double>::quiet_NaN();
      }
    });
    const auto c = finite(casg_err);
    result.sweep.push_back({n, "casg_rbf", quantile(c, 0.5), quantile(c, 0.25), quantile(c, 0.75)});
    result.sweep.push_back({n, "global_grad", quantile(global_err, 0.5), quantile(global_err, 0.25),
                            quantile(global_err, 0.75)});
  }
  return result;
}

std::vector<ToyRow> toy_sweep(const std::vector<double>& ks, double sigma, double h) {
  std::vector<ToyRow> out;
  for (double k : ks) {
    Vec d(2);
    d << 2.0 * k, 2.0;
    const CurvatureSpec spec = CurvatureSpec::from_diagonal(d, sigma, h);
    const Vec x0 = Vec::Zero(2);
    const DifferenceMatrix s_casg = casg_sample_set(spec, x0).second.s_star;
    const DifferenceMatrix s_fd = difference_matrix(fd_sample_set(spec, x0).first);
    ToyRow row;
    row.k = k;
    row.casg_objective = objective(s_casg, spec);
    row.fd_objective = objective(s_fd, spec);
    row.casg_approximation_error = approximation_error(s_casg, spec.hessian());
    row.cd_noise_error = 2.0 * sigma * sigma / (2.0 * h * h);
    out.push_back(row);
  }
  return out;
}

}  // namespace casg::harness
