#include "doctest.h"

#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "casg/baselines.hpp"
#include "casg/casg.hpp"
#include "casg/error.hpp"
#include "casg/harness/config.hpp"
#include "casg/harness/dfo.hpp"
#include "casg/harness/parallel.hpp"
#include "casg/harness/profile.hpp"
#include "casg/harness/sensitivity.hpp"
#include "casg/harness/tables.hpp"
#include "oracles.hpp"

using namespace casg;
using namespace casg::harness;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Io;
}

RunRecord make_record(const std::string& problem, const std::string& method, int run, double f0,
                      std::vector<TracePoint> trace, int dim = 2) {
  RunRecord r;
  r.problem = problem;
  r.method = method;
  r.run = run;
  r.dim = dim;
  r.h = 0.1;
  r.initial_value = f0;
  r.trace = std::move(trace);
  return r;
}

}  // namespace

TEST_CASE("parallel_for visits every index once and rethrows the lowest failure") {
  for (int threads : {1, 2, 5}) {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i] += static_cast<int>(i); });
    for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i] == static_cast<int>(i));
    std::atomic<int> visited{0};
    try {
      parallel_for(50, threads, [&](std::size_t i) {
        ++visited;
        if (i == 7 || i == 31) throw std::runtime_error("index " + std::to_string(i));
      });
      FAIL("expected throw");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "index 7");
    }
    CHECK(visited == 50);
  }
  CHECK(default_threads() >= 1);
}

TEST_CASE("noiseless quadratic converges with exact-Hessian CASG gradients") {
  DfoConfig cfg;
  cfg.sigma = 0.0;
  const auto p = make_problem("quad_well_4");
  const auto rec = dfo_single(p, "casg_exact", 0.1, 0, 11, cfg);
  REQUIRE_FALSE(rec.failed);
  REQUIRE(rec.trace.size() >= 1);
  bool reached = false;
  for (std::size_t i = 0; i < std::min<std::size_t>(50, rec.trace.size()); ++i) {
    if (rec.trace[i].value - p.f_star <= 1e-10) reached = true;
  }
  CHECK(reached);
}

TEST_CASE("optimization runs account for every evaluation") {
  DfoConfig cfg;
  cfg.sigma = 1e-5;
  cfg.lbfgs.budget = 30;
  cfg.init_points_per_dim = 10;
  for (const std::string method : {"casg_exact", "ecasg_exact", "fd_exact", "casg_rbf", "fd_rbf"}) {
    for (const std::string problem : {"quad_well_4", "quartic_indef_4"}) {
      const auto p = make_problem(problem);
      const int d = p.dim;
      for (bool include : {false, true}) {
        cfg.include_init_cost = include;
        const auto rec = dfo_single(p, method, 0.01, 0, 5, cfg);
        INFO(method, " ", problem);
        REQUIRE_FALSE(rec.failed);
        CHECK(rec.gradient_evaluations == static_cast<std::uint64_t>(rec.gradient_estimates) * (d + 1));
        const std::uint64_t init = is_model_method(method) ? static_cast<std::uint64_t>(10 * d) : 0;
        CHECK(rec.init_evaluations == init);
        const std::uint64_t offset = include ? init : 0;
        REQUIRE_FALSE(rec.trace.empty());
        CHECK(rec.trace.back().evaluations == offset + rec.gradient_evaluations + rec.line_search_evaluations);
        for (std::size_t i = 1; i < rec.trace.size(); ++i) {
          CHECK(rec.trace[i].evaluations >= rec.trace[i - 1].evaluations);
          CHECK(rec.trace[i].value <= rec.trace[i - 1].value);
        }
        CHECK(rec.final_value() <= rec.initial_value);
      }
    }
  }
}

TEST_CASE("central differences and the global gradient in optimization runs") {
  DfoConfig cfg;
  cfg.lbfgs.budget = 20;
  cfg.init_points_per_dim = 10;
  const auto p = make_problem("quad_well_4");
  const auto cd = dfo_single(p, "cd", 0.01, 0, 5, cfg);
  REQUIRE_FALSE(cd.failed);
  CHECK(cd.gradient_evaluations == static_cast<std::uint64_t>(cd.gradient_estimates) * 8);
  const auto gg = dfo_single(p, "global_grad", 0.01, 0, 5, cfg);
  REQUIRE_FALSE(gg.failed);
  CHECK(gg.gradient_evaluations == static_cast<std::uint64_t>(gg.gradient_estimates) * 5);
}

TEST_CASE("optimization runs are deterministic and independent of thread count") {
  DfoConfig cfg;
  cfg.problems = {make_problem("quad_well_4"), make_problem("rosenbrock_4")};
  cfg.methods = {"fd_exact", "casg_exact"};
  cfg.h_values = {0.1, 0.01};
  cfg.runs = 2;
  cfg.lbfgs.budget = 15;
  const auto a = dfo_run(cfg, 1);
  const auto b = dfo_run(cfg, 3);
  REQUIRE(a.size() == 16);
  std::ostringstream sa, sb;
  write_runs_csv(sa, a);
  write_runs_csv(sb, b);
  CHECK(sa.str() == sb.str());
  // Records follow configuration order: problem, method, step size, run.
  std::size_t i = 0;
  for (const auto& p : cfg.problems) {
    for (const auto& m : cfg.methods) {
      for (double h : cfg.h_values) {
        for (int run = 0; run < cfg.runs; ++run, ++i) {
          CHECK(a[i].problem == p.name);
          CHECK(a[i].method == m);
          CHECK(a[i].h == h);
          CHECK(a[i].run == run);
        }
      }
    }
  }
  // Paired seeds: every method sees the same seed in a given cell.
  CHECK(a[0].seed == a[4].seed);
}

TEST_CASE("optimization config errors") {
  DfoConfig cfg;
  cfg.methods = {"casg_exact"};
  CHECK(kind_of([&] { dfo_run(cfg, 1); }) == ErrorKind::Config);
  cfg.problems = {make_problem("quad_well_4")};
  cfg.methods = {"newton"};
  CHECK(kind_of([&] { dfo_run(cfg, 1); }) == ErrorKind::Config);
  cfg.methods = {};
  CHECK(kind_of([&] { dfo_run(cfg, 1); }) == ErrorKind::Config);
}

TEST_CASE("failed runs are recorded, not thrown") {
  DfoConfig cfg;
  cfg.init_points_per_dim = 0;
  const auto rec = dfo_single(make_problem("quad_well_4"), "casg_rbf", 0.1, 0, 1, cfg);
  CHECK(rec.failed);
  CHECK_FALSE(rec.error.empty());
  CHECK(rec.final_value() == rec.initial_value);
}

TEST_CASE("best step size selection") {
  std::vector<RunRecord> recs;
  for (int run = 0; run < 2; ++run) {
    auto a = make_record("p", "m", run, 10, {{4, 5.0}});
    a.h = 0.1;
    auto b = make_record("p", "m", run, 10, {{4, 1.0 + run}});
    b.h = 0.01;
    recs.push_back(a);
    recs.push_back(b);
  }
  const auto best = select_best_h(recs);
  REQUIRE(best.size() == 2);
  for (const auto& r : best) CHECK(r.h == 0.01);
}

TEST_CASE("data profile examples") {
  SUBCASE("single converging run") {
    const auto r = make_record("p", "m", 0, 10.0, {{4, 5.0}, {8, 1.0}, {12, 0.0}});
    const auto curves = data_profile({r}, 0.1);
    REQUIRE(curves.size() == 1);
    CHECK(curves[0].at(3.999) == 0.0);
    CHECK(curves[0].at(4.0) == 1.0);
    CHECK(curves[0].at(100.0) == 1.0);
    CHECK(convergence_budget(r, 0.0, 0.1) == 4.0);
    CHECK(convergence_budget(r, 0.0, 1e-5) == 6.0);
  }
  SUBCASE("tau close to one accepts the first point") {
    std::vector<RunRecord> recs;
    for (int run = 0; run < 4; ++run) recs.push_back(make_record("p", "m", run, 10.0, {{static_cast<std::uint64_t>(2 + 2 * run), 9.9}, {20, 0.0}}));
    for (const auto& r : recs) CHECK(convergence_budget(r, 0.0, 1.0 - 1e-9) == r.trace[0].evaluations / 2.0);
  }
  SUBCASE("identical records give identical curves") {
    std::vector<RunRecord> recs;
    for (int run = 0; run < 3; ++run) {
      recs.push_back(make_record("p", "a", run, 10.0, {{4, 5.0 - run}, {8, 1.0 * run}}));
      recs.push_back(make_record("p", "b", run, 10.0, {{4, 5.0 - run}, {8, 1.0 * run}}));
    }
    const auto curves = data_profile(recs, 0.1);
    REQUIRE(curves.size() == 2);
    CHECK(curves[0].budgets == curves[1].budgets);
    CHECK(curves[0].fractions == curves[1].fractions);
    for (const auto& c : curves) {
      for (std::size_t i = 0; i < c.fractions.size(); ++i) {
        CHECK(c.fractions[i] >= 0.0);
        CHECK(c.fractions[i] <= 1.0);
        if (i > 0) CHECK(c.fractions[i] >= c.fractions[i - 1]);
      }
    }
  }
  SUBCASE("f_L is the lowest mean final value over methods") {
    std::vector<RunRecord> recs{make_record("p", "a", 0, 10, {{2, 4.0}}), make_record("p", "a", 1, 10, {{2, 2.0}}),
                                make_record("p", "b", 0, 10, {{2, 1.0}}), make_record("p", "b", 1, 10, {{2, 7.0}})};
    const auto low = lowest_mean_values(recs);
    REQUIRE(low.size() == 1);
    CHECK(low[0].second == 3.0);
  }
  SUBCASE("errors") {
    CHECK(kind_of([] { data_profile({}, 0.1); }) == ErrorKind::EmptyRecordSet);
    const auto r = make_record("p", "m", 0, 10.0, {{4, 5.0}});
    CHECK(kind_of([&] { data_profile({r}, 0.0); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([&] { data_profile({r}, 1.0); }) == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("runs csv round trip") {
  DfoConfig cfg;
  cfg.problems = {make_problem("quad_well_4")};
  cfg.methods = {"casg_exact"};
  cfg.h_values = {0.1};
  cfg.runs = 2;
  cfg.lbfgs.budget = 10;
  const auto recs = dfo_run(cfg, 1);
  std::ostringstream out;
  write_runs_csv(out, recs);
  std::istringstream in(out.str());
  const auto back = read_runs_csv(in);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].problem == recs[i].problem);
    CHECK(back[i].method == recs[i].method);
    CHECK(back[i].h == recs[i].h);
    CHECK(back[i].seed == recs[i].seed);
    CHECK(back[i].initial_value == recs[i].initial_value);
    REQUIRE(back[i].trace.size() == recs[i].trace.size());
    for (std::size_t k = 0; k < recs[i].trace.size(); ++k) {
      CHECK(back[i].trace[k].evaluations == recs[i].trace[k].evaluations);
      CHECK(back[i].trace[k].value == recs[i].trace[k].value);
    }
  }
  std::ostringstream again;
  write_runs_csv(again, back);
  CHECK(again.str() == out.str());
  std::istringstream bad("not,a,runs,file\n");
  CHECK(kind_of([&] { read_runs_csv(bad); }) == ErrorKind::Io);
}

TEST_CASE("exact MSE formulas agree with Monte-Carlo") {
  const auto p = make_problem("quartic_indef_4");
  const Vec x = Vec::Constant(4, 0.15);
  const Vec g = p.gradient(x);
  const double sigma = 1e-3, h = 0.05;
  const auto sample = casg_sample_set(CurvatureSpec(p.hessian(x), sigma, h), x).first;
  const DifferenceMatrix s = difference_matrix(sample);
  GradientEstimator simplex = [&](const NoisyFunction& f, const Vec& x0) {
    const auto shifted = SampleSet::from_differences(x0, s.matrix());
    Vec df(4);
    const double f0 = f(x0);
    for (int i = 0; i < 4; ++i) df(i) = f(shifted.point(i + 1)) - f0;
    return simplex_gradient(s, df);
  };
  const auto mc = mse_monte_carlo(simplex, p.eval, sigma, g, x, 100000, 3);
  CHECK(std::abs(mc.mean - simplex_mse(p.eval, x, g, s, sigma)) <= 3 * mc.std_error);

  GradientEstimator central = [&](const NoisyFunction& f, const Vec& x0) { return cd_estimate(f, x0, h).gradient; };
  const auto mc_cd = mse_monte_carlo(central, p.eval, sigma, g, x, 100000, 4);
  CHECK(std::abs(mc_cd.mean - cd_mse(p.eval, x, g, h, sigma)) <= 3 * mc_cd.std_error);
}

TEST_CASE("quantiles") {
  CHECK(quantile({3, 1, 2}, 0.5) == 2.0);
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({1, 2, 3, 4, 5}, 0.25) == 2.0);
  CHECK(quantile({7}, 0.75) == 7.0);
}

TEST_CASE("toy sweep") {
  const auto rows = toy_sweep({1e-4, 1e-2, 1.0, 1e2, 1e4}, 0.1, 1.0);
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) CHECK(r.casg_objective <= r.fd_objective * (1 + 1e-12));
  const auto neg = toy_sweep({-1.0}, 0.1, 100.0);
  CHECK(neg[0].casg_approximation_error <= 1e-18);
  CHECK(neg[0].cd_noise_error == doctest::Approx(2 * 0.01 / (2 * 1e4)));
}

TEST_CASE("small sensitivity experiment") {
  SensitivityConfig cfg;
  cfg.problem = make_problem("quad_well_4");
  cfg.methods = {"casg_exact", "fd_exact", "cd", "casg_rbf", "global_grad"};
  cfg.h_values = {0.1, 0.01};
  cfg.points = 6;
  cfg.model_points = 200;
  cfg.sweep_sizes = {60, 200};
  const auto a = sensitivity_experiment(cfg, 1);
  const auto b = sensitivity_experiment(cfg, 2);
  std::ostringstream sa, sb;
  write_sensitivity_csv(sa, a.rows);
  write_sensitivity_csv(sb, b.rows);
  CHECK(sa.str() == sb.str());
  CHECK(a.rows.size() == 6u * (4 * 2 + 1));
  CHECK(a.summary.size() == 5);
  CHECK(a.sweep.size() == 4);
  for (const auto& r : a.rows) {
    CHECK_FALSE(r.failed);
    CHECK(r.mse >= 0.0);
  }
  for (const auto& s : a.summary) {
    CHECK(s.q25 <= s.median);
    CHECK(s.median <= s.q75);
    if (s.method == "casg_exact") CHECK(s.median_log2_ratio == 0.0);
  }
}

TEST_CASE("configuration parsing") {
  SUBCASE("problems") {
    CHECK(parse_problem(Json("ackley_8"), ".").dim == 8);
    CHECK(parse_problem(Json::parse(R"({"name": "ackley", "dim": 3})"), ".").dim == 3);
    CHECK(parse_problem(Json::parse(R"({"name": "quad_k", "k": -2})"), ".").hessian(Vec::Zero(2))(0, 0) == -4.0);
    CHECK(kind_of([] { parse_problem(Json::parse(R"({"name": "ackley", "dims": 3})"), "."); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_problem(Json("nope"), "."); }) == ErrorKind::Config);
  }
  SUBCASE("colon coefficients") {
    Json j;
    for (std::size_t i = 0; i < ColonCoefficients::names().size(); ++i) {
      j["coefficients"][ColonCoefficients::names()[i]] = ColonCoefficients::illustrative().values(static_cast<int>(i));
    }
    CHECK(parse_colon(j).values == ColonCoefficients::illustrative().values);
    Json missing = j;
    missing["coefficients"].erase(ColonCoefficients::names()[3]);
    CHECK(kind_of([&] { parse_colon(missing); }) == ErrorKind::Config);
    Json negative = j;
    negative["coefficients"][ColonCoefficients::names()[0]] = -1.0;
    CHECK(kind_of([&] { parse_colon(negative); }) == ErrorKind::Config);
  }
  SUBCASE("dfo") {
    const auto cfg = parse_dfo(Json::parse(R"({"problems": ["quad_well_4"], "methods": ["cd"], "runs": 3,
                                               "h_values": [0.5], "lbfgs": {"memory": 4}})"),
                               ".");
    CHECK(cfg.runs == 3);
    CHECK(cfg.lbfgs.memory == 4);
    CHECK(cfg.h_values == std::vector<double>{0.5});
    CHECK(kind_of([] { parse_dfo(Json::parse(R"({"problems": ["quad_well_4"], "methods": ["cd"], "bogus": 1})"), "."); }) ==
          ErrorKind::Config);
    CHECK(kind_of([] { parse_dfo(Json::parse(R"({"problems": [], "methods": ["cd"]})"), "."); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_dfo(Json::parse(R"({"problems": ["quad_well_4"], "methods": ["cd"], "runs": "x"})"), "."); }) ==
          ErrorKind::Config);
  }
  SUBCASE("sensitivity and profile") {
    const auto job = parse_sensitivity(Json::parse(R"({"toy": {"k": [1, 2], "sigma": 0.1, "h": 1}})"), ".");
    REQUIRE(job.toy);
    CHECK(job.toy->ks.size() == 2);
    const auto prof = parse_profile(Json::parse(R"({"runs_csv": "runs.csv"})"), "/tmp/x");
    CHECK(prof.runs_csv == "/tmp/x/runs.csv");
    CHECK(prof.taus.size() == 2);
  }
}
