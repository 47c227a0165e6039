#include "casg/harness/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "casg/error.hpp"

namespace casg::harness {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::Config, where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw Error(ErrorKind::Config, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get(const Json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::Config, "key '" + key + "' has the wrong type");
  }
}

template <class T>
T require(const Json& j, const std::string& key) {
  if (!j.contains(key)) throw Error(ErrorKind::Config, "missing key '" + key + "'");
  return get<T>(j, key, T{});
}

std::string resolve(const std::string& path, const std::string& base) {
  const std::filesystem::path p(path);
  if (p.is_absolute() || base.empty()) return path;
  return (std::filesystem::path(base) / p).lexically_normal().string();
}

std::uint64_t get_seed(const Json& j) {
  if (!j.contains("seed")) return 1;
  if (!j.at("seed").is_number_unsigned()) throw Error(ErrorKind::Config, "seed must be a non-negative integer");
  return j.at("seed").get<std::uint64_t>();
}

}  // namespace

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Config, path + ": " + e.what());
  }
}

std::string parent_dir(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  return parent.empty() ? std::string(".") : parent.string();
}

ColonCoefficients parse_colon(const Json& j) {
  const Json& c = j.contains("coefficients") ? j.at("coefficients") : j;
  if (!c.is_object()) throw Error(ErrorKind::Config, "coefficients must be an object");
  const auto& names = ColonCoefficients::names();
  ColonCoefficients out;
  out.values.resize(ColonCoefficients::kCount);
  for (const auto& [key, value] : c.items()) {
    if (std::find(names.begin(), names.end(), key) == names.end()) {
      throw Error(ErrorKind::Config, "unknown colon coefficient '" + key + "'");
    }
  }
  for (int i = 0; i < ColonCoefficients::kCount; ++i) {
    const double v = require<double>(c, names[i]);
    if (!(v > 0.0)) throw Error(ErrorKind::Config, "colon coefficient '" + names[i] + "' must be positive");
    out.values(i) = v;
  }
  return out;
}

Problem parse_problem(const Json& spec, const std::string& base_dir) {
  if (spec.is_string()) return make_problem(spec.get<std::string>());
  check_keys(spec, {"name", "dim", "k", "coefficients", "coefficients_file"}, "problem");
  const auto name = require<std::string>(spec, "name");
  if (name == "colon_ode" || name == "colon_fit") {
    if (spec.contains("coefficients") && spec.contains("coefficients_file")) {
      throw Error(ErrorKind::Config, "give either coefficients or coefficients_file");
    }
    ColonCoefficients c = ColonCoefficients::illustrative();
    if (spec.contains("coefficients")) c = parse_colon(spec.at("coefficients"));
    if (spec.contains("coefficients_file")) {
      const Json file = load_json(resolve(spec.at("coefficients_file").get<std::string>(), base_dir));
      check_keys(file, {"note", "coefficients"}, "coefficients file");
      c = parse_colon(file);
    }
    return name == "colon_ode" ? colon_ode(c) : colon_fit(c);
  }
  if (spec.contains("coefficients") || spec.contains("coefficients_file")) {
    throw Error(ErrorKind::Config, "coefficients only apply to colon_ode and colon_fit");
  }
  const int dim = get<int>(spec, "dim", 0);
  if (dim < 0) throw Error(ErrorKind::Config, "dim must be positive");
  return make_problem(name, dim, get<double>(spec, "k", 1.0));
}

SensitivityJob parse_sensitivity(const Json& j, const std::string& base_dir) {
  check_keys(j, {"problem", "methods", "h_values", "sigma", "points", "model_points", "smoothing",
                 "sweep_sizes", "seed", "toy"},
             "sensitivity config");
  SensitivityJob job;
  if (j.contains("toy")) {
    if (j.contains("problem")) throw Error(ErrorKind::Config, "give either problem or toy");
    const Json& t = j.at("toy");
    check_keys(t, {"k", "sigma", "h"}, "toy");
    ToyJob toy;
    toy.ks = require<std::vector<double>>(t, "k");
    toy.sigma = get<double>(t, "sigma", 0.1);
    toy.h = get<double>(t, "h", 1.0);
    if (toy.ks.empty()) throw Error(ErrorKind::Config, "toy k list is empty");
    if (!(toy.sigma > 0.0) || !(toy.h > 0.0)) throw Error(ErrorKind::Config, "toy sigma and h must be positive");
    job.toy = toy;
    return job;
  }
  if (!j.contains("problem")) throw Error(ErrorKind::Config, "missing key 'problem'");
  SensitivityConfig c;
  c.problem = parse_problem(j.at("problem"), base_dir);
  c.methods = require<std::vector<std::string>>(j, "methods");
  c.h_values = require<std::vector<double>>(j, "h_values");
  c.sigma = get<double>(j, "sigma", c.problem.noise_sigma);
  c.points = get<int>(j, "points", 100);
  c.model_points = get<int>(j, "model_points", 2000);
  c.smoothing = get<double>(j, "smoothing", 0.0);
  c.sweep_sizes = get<std::vector<int>>(j, "sweep_sizes", {});
  c.seed = get_seed(j);
  if (c.methods.empty()) throw Error(ErrorKind::Config, "method list is empty");
  if (c.model_points < 0 || c.smoothing < 0.0) throw Error(ErrorKind::Config, "invalid model settings");
  job.experiment = std::move(c);
  return job;
}

DfoConfig parse_dfo(const Json& j, const std::string& base_dir) {
  check_keys(j, {"problems", "methods", "h_values", "sigma", "runs", "seed", "budget", "include_init_cost",
                 "admit_line_search", "smoothing", "init_points_per_dim", "lbfgs"},
             "dfo config");
  DfoConfig c;
  if (!j.contains("problems") || !j.at("problems").is_array()) {
    throw Error(ErrorKind::Config, "missing array 'problems'");
  }
  for (const auto& p : j.at("problems")) c.problems.push_back(parse_problem(p, base_dir));
  if (c.problems.empty()) throw Error(ErrorKind::Config, "problem list is empty");
  c.methods = require<std::vector<std::string>>(j, "methods");
  if (c.methods.empty()) throw Error(ErrorKind::Config, "method list is empty");
  c.h_values = get<std::vector<double>>(j, "h_values", c.h_values);
  c.sigma = get<double>(j, "sigma", c.sigma);
  c.runs = get<int>(j, "runs", c.runs);
  c.seed = get_seed(j);
  c.lbfgs.budget = get<double>(j, "budget", c.lbfgs.budget);
  c.include_init_cost = get<bool>(j, "include_init_cost", c.include_init_cost);
  c.admit_line_search = get<bool>(j, "admit_line_search", c.admit_line_search);
  c.smoothing = get<double>(j, "smoothing", c.smoothing);
  c.init_points_per_dim = get<int>(j, "init_points_per_dim", c.init_points_per_dim);
  if (j.contains("lbfgs")) {
    const Json& l = j.at("lbfgs");
    check_keys(l, {"memory", "armijo", "noise_allowance", "max_backtracks", "max_iterations"}, "lbfgs");
    c.lbfgs.memory = get<int>(l, "memory", c.lbfgs.memory);
    c.lbfgs.armijo = get<double>(l, "armijo", c.lbfgs.armijo);
    c.lbfgs.noise_allowance = get<double>(l, "noise_allowance", c.lbfgs.noise_allowance);
    c.lbfgs.max_backtracks = get<int>(l, "max_backtracks", c.lbfgs.max_backtracks);
    c.lbfgs.max_iterations = get<int>(l, "max_iterations", c.lbfgs.max_iterations);
  }
  if (!(c.sigma >= 0.0) || c.runs < 1 || !(c.lbfgs.budget > 0.0) || c.init_points_per_dim < 0 ||
      c.smoothing < 0.0) {
    throw Error(ErrorKind::Config, "invalid dfo settings");
  }
  return c;
}

ProfileJob parse_profile(const Json& j, const std::string& base_dir) {
  check_keys(j, {"runs_csv", "taus", "select_best_h"}, "profile config");
  ProfileJob job;
  job.runs_csv = resolve(require<std::string>(j, "runs_csv"), base_dir);
  job.taus = get<std::vector<double>>(j, "taus", job.taus);
  job.select_best_h = get<bool>(j, "select_best_h", job.select_best_h);
  if (job.taus.empty()) throw Error(ErrorKind::Config, "tau list is empty");
  for (double t : job.taus) {
    if (!(t > 0.0 && t < 1.0)) throw Error(ErrorKind::Config, "tau values must lie in (0, 1)");
  }
  return job;
}

}  // namespace casg::harness
