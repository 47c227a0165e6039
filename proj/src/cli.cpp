#include "casg/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "casg/baselines.hpp"
#include "casg/casg.hpp"
#include "casg/ecasg.hpp"
#include "casg/error.hpp"
#include "casg/global_model.hpp"
#include "casg/harness/config.hpp"
#include "casg/harness/dfo.hpp"
#include "casg/harness/parallel.hpp"
#include "casg/harness/profile.hpp"
#include "casg/harness/reference.hpp"
#include "casg/harness/sensitivity.hpp"
#include "casg/harness/tables.hpp"
#include "casg/history_io.hpp"

namespace casg {

namespace {

using harness::Json;
namespace fs = std::filesystem;

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

class Logger {
 public:
  explicit Logger(std::ostream& err) : err_(err) {
    const char* env = std::getenv("CASG_LOG");
    const std::string v = env ? env : "warn";
    if (v == "error") level_ = Level::Error;
    else if (v == "info") level_ = Level::Info;
    else if (v == "debug") level_ = Level::Debug;
  }
  void log(Level l, const std::string& msg) const {
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (l <= level_) err_ << "[" << names[static_cast<int>(l)] << "] " << msg << '\n';
  }

 private:
  std::ostream& err_;
  Level level_ = Level::Warn;
};

/// Failure of a named stage with a fixed exit code.
struct StageError {
  int code;
  std::string message;
};

int code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config:
    case ErrorKind::Io:
    case ErrorKind::InvalidArgument: return kExitUsage;
    default: return kExitNumerical;
  }
}

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw StageError{code_for(e.kind()), name + ": " + to_string(e.kind()) + ": " + e.what()};
  } catch (const std::exception& e) {
    throw StageError{kExitNumerical, name + ": " + e.what()};
  }
}

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(std::isfinite(v(i)) ? Json(v(i)) : Json());
  return a;
}

Json rows_json(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(m.row(i).transpose()));
  return a;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(); }

Vec parse_point(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v)) {
      throw Error(ErrorKind::Config, "--at: bad coordinate '" + cell + "'");
    }
    vals.push_back(v);
  }
  if (vals.empty()) throw Error(ErrorKind::Config, "--at is empty");
  return Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

/// CSV text to an array of row objects; numeric cells become numbers.
Json csv_to_json(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string c;
    while (std::getline(hs, c, ',')) header.push_back(c);
  }
  Json rows = Json::array();
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string c;
    Json row = Json::object();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (!std::getline(ls, c, ',')) c.clear();
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c == "nan") row[header[i]] = nullptr;
      else if (!c.empty() && end == c.c_str() + c.size()) row[header[i]] = v;
      else row[header[i]] = c;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
  std::string format = "csv";
};

void add_common(CLI::App* app, Common& c, bool needs_config) {
  auto* opt = app->add_option("--config", c.config, "JSON configuration file");
  if (needs_config) opt->required();
  app->add_option("--seed", c.seed, "override the configured root seed");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--threads", c.threads, "worker threads (default: logical cores)")->check(CLI::PositiveNumber);
  app->add_option("--format", c.format, "table format")->check(CLI::IsMember({"csv", "json"}));
}

int threads_of(const Common& c) { return c.threads > 0 ? c.threads : harness::default_threads(); }

fs::path out_dir(const Common& c) {
  if (c.out.empty()) throw Error(ErrorKind::Config, "--out is required");
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + c.out + "': " + ec.message());
  return fs::path(c.out);
}

/// Writes a table produced as CSV text, converted when --format json.
std::string write_table(const Common& c, const fs::path& dir, const std::string& stem,
                        const std::function<void(std::ostream&)>& writer) {
  std::ostringstream csv;
  writer(csv);
  const bool json = c.format == "json";
  const fs::path path = dir / (stem + (json ? ".json" : ".csv"));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  if (json) f << csv_to_json(csv.str()).dump(2) << '\n';
  else f << csv.str();
  if (!f) throw Error(ErrorKind::Io, "write to '" + path.string() + "' failed");
  return path.filename().string();
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  f << j.dump(2) << '\n';
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  std::string method;
  std::string problem;
  int dim = 0;
  double k = 1.0;
  double sigma = 0.0;
  double h = 0.0;
  std::string at;
  std::string history;
  double smoothing = 0.1;
};

int cmd_estimate(const EstimateArgs& a, const Common& c, std::ostream& out, const Logger& log) {
  static const std::vector<std::string> methods{"casg", "ecasg", "fd", "cd", "global_grad"};
  if (std::find(methods.begin(), methods.end(), a.method) == methods.end()) {
    throw Error(ErrorKind::Config, "unknown method '" + a.method + "'");
  }
  if (!(a.sigma > 0.0)) throw Error(ErrorKind::Config, "--sigma must be positive");
  if (!(a.h > 0.0)) throw Error(ErrorKind::Config, "--h must be positive");
  harness::Problem problem;
  if (!c.config.empty()) {
    const Json j = harness::load_json(c.config);
    problem = harness::parse_problem(j.contains("problem") ? j.at("problem") : j, harness::parent_dir(c.config));
  } else if (!a.problem.empty()) {
    problem = harness::make_problem(a.problem, a.dim, a.k);
  } else {
    throw Error(ErrorKind::Config, "--problem or --config is required");
  }
  const Vec x0 = a.at.empty() ? problem.start : parse_point(a.at);
  if (x0.size() != problem.dim) {
    throw Error(ErrorKind::Config, "--at has " + std::to_string(x0.size()) + " coordinates, problem has " +
                                       std::to_string(problem.dim));
  }
  const bool use_model = !a.history.empty();
  if (a.method == "global_grad" && !use_model) throw Error(ErrorKind::Config, "global_grad needs --history");

  harness::NoisyOracle oracle(problem, a.sigma, c.seed.value_or(1));
  const NoisyFunction f = [&](const Vec& x) { return oracle(x); };

  Json j;
  j["method"] = a.method;
  j["problem"] = problem.name;
  j["dim"] = problem.dim;
  j["x0"] = to_json(x0);
  j["sigma"] = a.sigma;
  j["h"] = a.h;

  Mat hess;
  EvaluationHistory history;
  if (use_model) {
    history = stage("history", [&] { return load_history_csv(a.history); });
    if (history.dim() != problem.dim) throw StageError{kExitUsage, "history: dimension does not match problem"};
    j["hessian_source"] = "global_model";
    j["history_records"] = history.size();
  } else if (a.method != "cd") {
    hess = stage("reference hessian", [&] { return harness::reference_hessian(problem, x0); });
    j["hessian_source"] = "exact";
  }

  Vec gradient;
  std::optional<DifferenceMatrix> s;
  std::uint64_t evaluations = 0;
  if (a.method == "cd") {
    const GradientEstimate est = stage("estimate", [&] { return cd_estimate(f, x0, a.h); });
    gradient = est.gradient;
    evaluations = est.evaluations.size();
  } else if (use_model) {
    const EstimatorKind kind = a.method == "casg"    ? EstimatorKind::Casg
                               : a.method == "ecasg" ? EstimatorKind::Ecasg
                               : a.method == "fd"    ? EstimatorKind::Fd
                                                     : EstimatorKind::GlobalGrad;
    const FrameworkResult fr = stage("global model", [&] {
      return framework_step(history, FilterPolicy::standard(problem.dim), a.smoothing, kind, a.sigma, a.h, f, x0);
    });
    gradient = fr.gradient;
    hess = fr.hessian;
    evaluations = static_cast<std::uint64_t>(fr.estimate_evaluations);
    j["stencil_evaluations"] = fr.stencil_evaluations;
    if (kind != EstimatorKind::GlobalGrad) {
      Mat sm(problem.dim, problem.dim);
      const auto& recs = fr.history.records();
      const std::size_t first = history.size();
      for (int i = 0; i < problem.dim; ++i) sm.col(i) = recs[first + 1 + i].x - x0;
      s.emplace(sm);
    }
  } else {
    const CurvatureSpec spec = stage("curvature", [&] { return CurvatureSpec(hess, a.sigma, a.h); });
    SampleSet sample = stage("design", [&]() -> SampleSet {
      if (a.method == "casg") return casg_sample_set(spec, x0).first;
      if (a.method == "ecasg") return ecasg_sample_set(spec, x0).sample;
      return fd_sample_set(spec, x0).first;
    });
    const GradientEstimate est = stage("estimate", [&] { return fd_estimate(f, sample); });
    gradient = est.gradient;
    evaluations = est.evaluations.size();
    s.emplace(difference_matrix(sample));
  }
  j["gradient"] = to_json(gradient);
  j["evaluations"] = evaluations;
  if (s) {
    Json pts = Json::array();
    pts.push_back(to_json(x0));
    for (int i = 0; i < problem.dim; ++i) pts.push_back(to_json(x0 + s->matrix().col(i)));
    j["sample_set"] = pts;
    j["difference_matrix"] = rows_json(s->matrix());
    const CurvatureSpec spec(hess, a.sigma, a.h);
    j["objective"] = number(objective(*s, spec));
  }
  log.log(Level::Info, "estimate done with " + std::to_string(evaluations) + " evaluations");
  out << j.dump(2) << '\n';
  return kExitOk;
}

// ------------------------------------------------------------- sensitivity

int cmd_sensitivity(const Common& c, std::ostream& out, const Logger& log) {
  const Json cfg = harness::load_json(c.config);
  harness::SensitivityJob job = harness::parse_sensitivity(cfg, harness::parent_dir(c.config));
  const fs::path dir = out_dir(c);
  Json summary;
  if (job.toy) {
    if (c.seed) log.log(Level::Warn, "--seed has no effect on the toy sweep");
    const auto rows = stage("toy sweep", [&] { return harness::toy_sweep(job.toy->ks, job.toy->sigma, job.toy->h); });
    summary["kind"] = "toy";
    summary["tables"] = {write_table(c, dir, "toy", [&](std::ostream& o) { harness::write_toy_csv(o, rows); })};
    Json jr = Json::array();
    for (const auto& r : rows) {
      jr.push_back({{"k", r.k},
                    {"casg_objective", number(r.casg_objective)},
                    {"fd_objective", number(r.fd_objective)},
                    {"ratio_fd_over_casg", number(r.fd_objective / r.casg_objective)}});
    }
    summary["rows"] = jr;
    write_json(dir / "summary.json", summary);
    out << summary.dump(2) << '\n';
    return kExitOk;
  }
  harness::SensitivityConfig& e = *job.experiment;
  if (c.seed) e.seed = *c.seed;
  log.log(Level::Info, "sensitivity on " + e.problem.name + " with " + std::to_string(e.points) + " points");
  const harness::SensitivityResult res =
      stage("sensitivity", [&] { return harness::sensitivity_experiment(e, threads_of(c)); });
  summary["kind"] = "sensitivity";
  summary["problem"] = e.problem.name;
  summary["sigma"] = e.sigma;
  summary["points"] = e.points;
  summary["model_points"] = e.model_points;
  summary["seed"] = e.seed;
  Json methods = Json::array();
  for (const auto& s : res.summary) {
    methods.push_back({{"method", s.method},
                       {"best_h", s.best_h},
                       {"median_mse", number(s.median)},
                       {"q25_mse", number(s.q25)},
                       {"q75_mse", number(s.q75)},
                       {"baseline", s.baseline},
                       {"median_log2_ratio", number(s.median_log2_ratio)},
                       {"failures", s.failures}});
  }
  summary["methods"] = methods;
  Json tables = Json::array();
  tables.push_back(write_table(c, dir, "sensitivity", [&](std::ostream& o) { harness::write_sensitivity_csv(o, res.rows); }));
  if (!res.sweep.empty()) {
    tables.push_back(write_table(c, dir, "sweep", [&](std::ostream& o) { harness::write_sweep_csv(o, res.sweep); }));
  }
  summary["tables"] = tables;
  summary["failures"] = res.failures;
  write_json(dir / "summary.json", summary);
  out << summary.dump(2) << '\n';
  return res.failures.empty() ? kExitOk : kExitPartial;
}

// --------------------------------------------------------------------- dfo

int cmd_dfo(const Common& c, std::ostream& out, const Logger& log) {
  const Json cfg = harness::load_json(c.config);
  harness::DfoConfig dc = harness::parse_dfo(cfg, harness::parent_dir(c.config));
  if (c.seed) dc.seed = *c.seed;
  const fs::path dir = out_dir(c);
  log.log(Level::Info, "dfo: " + std::to_string(dc.problems.size()) + " problems, " +
                           std::to_string(dc.methods.size()) + " methods");
  const auto records = stage("dfo", [&] { return harness::dfo_run(dc, threads_of(c)); });
  Json summary;
  summary["kind"] = "dfo";
  summary["seed"] = dc.seed;
  summary["sigma"] = dc.sigma;
  summary["runs"] = records.size();
  Json failures = Json::array();
  for (const auto& r : records) {
    if (r.failed) {
      failures.push_back({{"problem", r.problem}, {"method", r.method}, {"h", r.h}, {"run", r.run}, {"error", r.error}});
    }
  }
  Json best = Json::array();
  const auto selected = harness::select_best_h(records);
  std::vector<std::pair<std::string, std::string>> seen;
  for (const auto& r : selected) {
    const auto key = std::make_pair(r.problem, r.method);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    double sum = 0.0;
    int n = 0;
    for (const auto& q : selected) {
      if (q.problem == r.problem && q.method == r.method) {
        sum += q.final_value();
        ++n;
      }
    }
    best.push_back({{"problem", r.problem}, {"method", r.method}, {"h", r.h}, {"mean_final_value", number(sum / n)}});
  }
  summary["best_h"] = best;
  summary["failed"] = failures.size();
  summary["failures"] = failures;
  summary["tables"] = {write_table(c, dir, "runs", [&](std::ostream& o) { harness::write_runs_csv(o, records); })};
  write_json(dir / "summary.json", summary);
  out << summary.dump(2) << '\n';
  return failures.empty() ? kExitOk : kExitPartial;
}

// ----------------------------------------------------------------- profile

int cmd_profile(const Common& c, std::ostream& out, const Logger& log) {
  const Json cfg = harness::load_json(c.config);
  const harness::ProfileJob job = harness::parse_profile(cfg, harness::parent_dir(c.config));
  if (c.seed) log.log(Level::Warn, "--seed has no effect on profiles");
  std::ifstream in(job.runs_csv);
  if (!in) throw Error(ErrorKind::Io, "cannot open runs table '" + job.runs_csv + "'");
  auto records = harness::read_runs_csv(in);
  if (job.select_best_h) records = harness::select_best_h(records);
  const fs::path dir = out_dir(c);
  std::vector<std::pair<double, std::vector<harness::ProfileCurve>>> curves;
  for (double tau : job.taus) {
    curves.emplace_back(tau, stage("profile", [&] { return harness::data_profile(records, tau); }));
  }
  Json summary;
  summary["kind"] = "profile";
  summary["runs"] = records.size();
  Json jc = Json::array();
  for (const auto& [tau, cs] : curves) {
    for (const auto& cv : cs) {
      Json at = Json::object();
      for (double b : {20.0, 50.0, 100.0, 200.0}) at[format_double(b)] = cv.at(b);
      jc.push_back({{"tau", tau}, {"method", cv.method}, {"runs", cv.runs}, {"fraction_at_budget", at}});
    }
  }
  summary["curves"] = jc;
  summary["tables"] = {write_table(c, dir, "profile", [&](std::ostream& o) { harness::write_profile_csv(o, curves); })};
  write_json(dir / "summary.json", summary);
  out << summary.dump(2) << '\n';
  return kExitOk;
}

// ----------------------------------------------------------------- history

EvaluationHistory history_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("records") || !j.at("records").is_array()) {
    throw Error(ErrorKind::Config, "history JSON needs a 'records' array");
  }
  EvaluationHistory h;
  for (const auto& r : j.at("records")) {
    try {
      const auto x = r.at("x").get<std::vector<double>>();
      const Vec v = Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size()));
      h.append(v, r.at("y").get<double>(), r.at("step").get<std::uint64_t>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Config, std::string("bad history record: ") + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, std::string("bad history record: ") + e.what());
    }
  }
  return h;
}

Json history_to_json(const EvaluationHistory& h) {
  Json recs = Json::array();
  for (const auto& r : h.records()) recs.push_back({{"step", r.step}, {"x", to_json(r.x)}, {"y", r.y}});
  return {{"dim", h.dim()}, {"records", recs}};
}

Json history_summary(const EvaluationHistory& h, const std::string& path) {
  return {{"records", h.size()},
          {"dim", h.dim()},
          {"first_step", h.empty() ? 0 : h.records().front().step},
          {"last_step", h.last_step()},
          {"file", fs::path(path).filename().string()}};
}

int cmd_history_import(const std::string& input, const Common& c, std::ostream& out) {
  EvaluationHistory h;
  if (fs::path(input).extension() == ".json") h = history_from_json(harness::load_json(input));
  else h = load_history_csv(input);
  const fs::path dir = out_dir(c);
  const fs::path path = dir / "history.csv";
  save_history_csv(path.string(), h);
  out << history_summary(h, path.string()).dump(2) << '\n';
  return kExitOk;
}

int cmd_history_export(const std::string& input, const Common& c, std::ostream& out) {
  const EvaluationHistory h = load_history_csv(input);
  const fs::path dir = out_dir(c);
  fs::path path;
  if (c.format == "json") {
    path = dir / "history.json";
    write_json(path, history_to_json(h));
  } else {
    path = dir / "history.csv";
    save_history_csv(path.string(), h);
  }
  out << history_summary(h, path.string()).dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const Logger log(err);
  CLI::App app{"Optimal sample sets for noisy simplex gradients", "casg"};
  app.set_help_flag("--help", "print this help");
  app.require_subcommand(1);

  Common common;
  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "one gradient estimate at a point");
  add_common(estimate, common, false);
  estimate->add_option("--method", est.method, "casg | ecasg | fd | cd | global_grad")->required();
  estimate->add_option("--problem", est.problem, "built-in problem name");
  estimate->add_option("--dim", est.dim, "dimension for ackley / rosenbrock");
  estimate->add_option("--k", est.k, "curvature parameter for quad_k");
  estimate->add_option("--sigma", est.sigma, "noise standard deviation")->required();
  estimate->add_option("--h", est.h, "sample radius bound / CD step")->required();
  estimate->add_option("--at", est.at, "comma-separated point (default: problem start)");
  estimate->add_option("--history", est.history, "evaluation history CSV for the global model");
  estimate->add_option("--smoothing", est.smoothing, "global model smoothing");

  Common sens_c, dfo_c, prof_c, imp_c, exp_c;
  auto* sens = app.add_subcommand("sensitivity", "gradient accuracy at random points");
  add_common(sens, sens_c, true);
  auto* dfo = app.add_subcommand("dfo", "L-BFGS runs with pluggable gradient estimators");
  add_common(dfo, dfo_c, true);
  auto* prof = app.add_subcommand("profile", "data profiles from a runs table");
  add_common(prof, prof_c, true);
  std::string imp_in, exp_in;
  exp_c.format = "json";
  auto* imp = app.add_subcommand("history-import", "validate a history (CSV or JSON) and store it as CSV");
  add_common(imp, imp_c, false);
  imp->add_option("--input", imp_in, "history file (.csv or .json)")->required();
  auto* exp = app.add_subcommand("history-export", "convert a history CSV to JSON or canonical CSV");
  add_common(exp, exp_c, false);
  exp->add_option("--input", exp_in, "history CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    err << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  try {
    if (estimate->parsed()) return cmd_estimate(est, common, out, log);
    if (sens->parsed()) return cmd_sensitivity(sens_c, out, log);
    if (dfo->parsed()) return cmd_dfo(dfo_c, out, log);
    if (prof->parsed()) return cmd_profile(prof_c, out, log);
    if (imp->parsed()) return cmd_history_import(imp_in, imp_c, out);
    if (exp->parsed()) return cmd_history_export(exp_in, exp_c, out);
  } catch (const StageError& e) {
    log.log(Level::Error, e.message);
    return e.code;
  } catch (const Error& e) {
    log.log(Level::Error, std::string(to_string(e.kind())) + ": " + e.what());
    return code_for(e.kind());
  } catch (const std::exception& e) {
    log.log(Level::Error, e.what());
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace casg
