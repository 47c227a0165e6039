#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "casg/baselines.hpp"
#include "casg/casg.hpp"
#include "casg/error.hpp"
#include "casg/global_model.hpp"
#include "oracles.hpp"

using namespace casg;

namespace {

EvaluationHistory sample_history(const std::function<double(const Vec&)>& f, int n, int d, double lo, double hi,
                                 std::uint64_t seed) {
  Rng rng(seed);
  EvaluationHistory h;
  for (int i = 0; i < n; ++i) {
    Vec x(d);
    for (int j = 0; j < d; ++j) x(j) = rng.uniform(lo, hi);
    h.append(x, f(x));
  }
  return h;
}

double smooth_fn(const Vec& x) { return std::sin(2 * x(0)) + x(1) * x(1) * std::cos(x(0)) + 0.3 * x.sum(); }

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("interpolation at centers with zero smoothing") {
  const auto hist = sample_history(smooth_fn, 60, 3, -1, 1, 1);
  const auto m = fit_rbf(hist, 0.0);
  CHECK(m.size() == 60);
  CHECK(m.dim() == 3);
  for (const auto& r : hist.records()) CHECK(std::abs(m.value(r.x) - r.y) <= 1e-8 * (1 + std::abs(r.y)));
}

TEST_CASE("public coefficients reproduce the model value") {
  const auto hist = sample_history(smooth_fn, 40, 2, -0.5, 2, 2);
  const auto m = fit_rbf(hist, 0.05);
  const Mat c = m.centers();
  const Vec w = m.weights();
  const Vec t = m.tail();
  REQUIRE(t.size() == 3);
  for (int i = 0; i < 40; ++i) CHECK((c.row(i).transpose() - hist.records()[i].x).norm() <= 1e-14);
  Rng rng(3);
  for (int q = 0; q < 20; ++q) {
    const Vec x = (Vec(2) << rng.uniform(-1, 2), rng.uniform(-1, 2)).finished();
    double v = t(0) + t.tail(2).dot(x);
    for (int i = 0; i < c.rows(); ++i) v += w(i) * std::pow((x - c.row(i).transpose()).norm(), 3);
    CHECK(v == doctest::Approx(m.value(x)).epsilon(1e-10));
  }
}

TEST_CASE("analytic derivatives agree with finite differences of the model") {
  const auto hist = sample_history(smooth_fn, 80, 3, -1, 1, 4);
  const auto m = fit_rbf(hist, 0.0);
  Rng rng(5);
  auto value = [&](const Vec& x) { return m.value(x); };
  auto grad = [&](const Vec& x) { return m.gradient(x); };
  for (int q = 0; q < 100; ++q) {
    Vec x(3);
    for (int j = 0; j < 3; ++j) x(j) = rng.uniform(-1, 1);
    const Vec g = m.gradient(x);
    const Vec gfd = oracle::fd_gradient(value, x, 1e-5);
    CHECK((g - gfd).norm() <= 1e-5 * std::max(1.0, g.norm()));
    const Mat h = m.hessian(x);
    const Mat hfd = oracle::fd_jacobian(grad, x, 1e-4);
    CHECK((h - hfd).norm() <= 1e-3 * std::max(1.0, h.norm()));
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::get<double>(model_query(m, x, QueryOrder::Value)) == m.value(x));
    CHECK(std::get<Vec>(model_query(m, x, QueryOrder::Gradient)) == g);
    CHECK(std::get<Mat>(model_query(m, x, QueryOrder::Hessian)) == h);
  }
}

TEST_CASE("kernel Hessian vanishes at its own center") {
  const auto hist = sample_history(smooth_fn, 30, 2, -1, 1, 6);
  const auto m = fit_rbf(hist, 0.0);
  const Mat c = m.centers();
  const Vec w = m.weights();
  for (int i = 0; i < 5; ++i) {
    const Vec x = c.row(i).transpose();
    Mat want = Mat::Zero(2, 2);
    for (int j = 0; j < c.rows(); ++j) {
      if (j == i) continue;
      const Vec u = x - c.row(j).transpose();
      const double r = u.norm();
      want += w(j) * (3 * r * Mat::Identity(2, 2) + 3 * u * u.transpose() / r);
    }
    CHECK((m.hessian(x) - want).norm() <= 1e-10 * std::max(1.0, want.norm()));
  }
}

TEST_CASE("affine data is reproduced by the tail") {
  const Vec c = (Vec(3) << 0.5, -1.5, 2.0).finished();
  const auto hist = sample_history([&](const Vec& x) { return 1.25 + c.dot(x); }, 30, 3, -2, 2, 7);
  const auto m = fit_rbf(hist, 0.0);
  CHECK(m.weights().norm() <= 1e-6);
  CHECK(m.tail()(0) == doctest::Approx(1.25).epsilon(1e-8));
  CHECK((m.tail().tail(3) - c).norm() <= 1e-8);
  CHECK((m.gradient(Vec::Constant(3, 0.3)) - c).norm() <= 1e-8);
}

TEST_CASE("model Hessian of a sampled quadratic") {
  const Mat hq = (Mat(2, 2) << 2.0, 0.5, 0.5, 1.0).finished();
  const auto hist = sample_history([&](const Vec& x) { return 0.5 * x.dot(hq * x); }, 200, 2, -1, 1, 8);
  const auto m = fit_rbf(hist, 0.0);
  const Mat h0 = m.hessian(Vec::Zero(2));
  CHECK((h0 - hq).norm() <= 0.05 * hq.norm());
}

TEST_CASE("fit errors") {
  SUBCASE("duplicate point with conflicting values") {
    EvaluationHistory h = sample_history(smooth_fn, 10, 2, -1, 1, 9);
    h.append(h.records()[3].x, h.records()[3].y + 0.5);
    CHECK(kind_of([&] { fit_rbf(h, 0.0); }) == ErrorKind::DegenerateGeometry);
    const auto filtered = filter_history(h, FilterPolicy{FilterPolicy::Mode::All, 0, 1e-9}, Vec::Zero(2));
    CHECK(filtered.size() == 10);
    CHECK_NOTHROW(fit_rbf(filtered, 0.0));
  }
  SUBCASE("collinear points") {
    EvaluationHistory h;
    for (int i = 0; i < 10; ++i) h.append((Vec(2) << i / 8.0, i / 4.0).finished(), std::sin(i));
    CHECK(kind_of([&] { fit_rbf(h, 0.0); }) == ErrorKind::DegenerateGeometry);
  }
  SUBCASE("too few points") {
    const auto h = sample_history(smooth_fn, 3, 2, -1, 1, 10);
    CHECK(kind_of([&] { fit_rbf(h, 0.0); }) == ErrorKind::DegenerateGeometry);
  }
  SUBCASE("negative smoothing") {
    const auto h = sample_history(smooth_fn, 10, 2, -1, 1, 10);
    CHECK_THROWS_AS(fit_rbf(h, -1.0), Error);
  }
}

TEST_CASE("fitting residual grows with smoothing") {
  Rng noise(11);
  const auto hist = sample_history([&](const Vec& x) { return smooth_fn(x) + 0.05 * noise.normal(); }, 50, 2, -1, 1, 12);
  double prev = -1.0;
  for (double s : {0.0, 0.01, 0.1, 1.0}) {
    const auto m = fit_rbf(hist, s);
    double res = 0.0;
    for (const auto& r : hist.records()) res += std::pow(m.value(r.x) - r.y, 2);
    CHECK(res >= prev);
    prev = res;
  }
  CHECK(prev > 0.0);
}

TEST_CASE("history filters") {
  const auto hist = sample_history(smooth_fn, 50, 2, -1, 1, 13);
  const Vec x0 = (Vec(2) << 0.2, -0.1).finished();
  std::set<std::uint64_t> steps;
  for (const auto& r : hist.records()) steps.insert(r.step);

  for (int k : {3, 10, 50, 80}) {
    const auto near = filter_history(hist, FilterPolicy{FilterPolicy::Mode::NearestK, k, 0.0}, x0);
    CHECK(near.size() == static_cast<std::size_t>(std::min(k, 50)));
    double max_in = 0.0;
    std::set<std::uint64_t> chosen;
    for (std::size_t i = 0; i < near.size(); ++i) {
      const auto& r = near.records()[i];
      CHECK(steps.count(r.step) == 1);
      CHECK(r.x == hist.records()[r.step - 1].x);
      if (i > 0) CHECK(r.step > near.records()[i - 1].step);
      max_in = std::max(max_in, (r.x - x0).norm());
      chosen.insert(r.step);
    }
    for (const auto& r : hist.records()) {
      if (!chosen.count(r.step)) CHECK((r.x - x0).norm() >= max_in);
    }
  }
  const auto latest = filter_history(hist, FilterPolicy{FilterPolicy::Mode::LatestK, 5, 0.0}, x0);
  REQUIRE(latest.size() == 5);
  CHECK(latest.records().front().step == 46);
  CHECK(latest.records().back().step == 50);
  CHECK(filter_history(hist, FilterPolicy{FilterPolicy::Mode::All, 0, 0.0}, x0).size() == 50);
  CHECK_THROWS_AS(filter_history(hist, FilterPolicy{FilterPolicy::Mode::NearestK, 2, 0.0}, x0), Error);
  CHECK(FilterPolicy::standard(4).k == 400);
  CHECK(FilterPolicy::standard(20).k == 1000);
}

TEST_CASE("framework step bookkeeping") {
  for (auto [kind, d] : {std::pair{EstimatorKind::Casg, 2}, std::pair{EstimatorKind::Ecasg, 3},
                         std::pair{EstimatorKind::Fd, 3}}) {
    const auto hist = sample_history(smooth_fn, 60, d, -1, 1, 14);
    const EvaluationHistory copy = hist;
    Rng rng(15);
    NoisyFunction f = [&](const Vec& x) { return smooth_fn(x) + 1e-3 * rng.normal(); };
    const Vec x0 = Vec::Constant(d, 0.1);
    const auto r = framework_step(hist, FilterPolicy::standard(d), 0.0, kind, 1e-3, 0.1, f, x0);
    CHECK(r.history.size() == hist.size() + d + 1);
    CHECK(r.estimate_evaluations == d + 1);
    CHECK(r.stencil_evaluations == 0);
    CHECK(r.gradient.size() == d);
    REQUIRE(hist.size() == copy.size());
    for (std::size_t i = 0; i < hist.size(); ++i) {
      CHECK(hist.records()[i].x == copy.records()[i].x);
      CHECK(r.history.records()[i].x == copy.records()[i].x);
      CHECK(r.history.records()[i].y == copy.records()[i].y);
      CHECK(r.history.records()[i].step == copy.records()[i].step);
    }
    CHECK(r.history.records().back().step > hist.last_step());
  }
}

TEST_CASE("global gradient on affine data") {
  const Vec c = (Vec(3) << 0.5, -1.5, 2.0).finished();
  auto affine = [&](const Vec& x) { return 1.25 + c.dot(x); };
  const auto hist = sample_history(affine, 30, 3, -2, 2, 16);
  int calls = 0;
  NoisyFunction f = [&](const Vec& x) {
    ++calls;
    return affine(x);
  };
  const auto r = framework_step(hist, FilterPolicy::standard(3), 0.0, EstimatorKind::GlobalGrad, 1e-3, 0.1, f,
                                Vec::Constant(3, 0.2));
  CHECK((r.gradient - c).norm() <= 1e-8);
  CHECK(r.estimate_evaluations == 0);
  CHECK(r.stencil_evaluations == 4);
  CHECK(calls == 4);
  CHECK(r.history.size() == hist.size() + 4);
  const Vec x0 = Vec::Constant(3, 0.2);
  const auto& recs = r.history.records();
  CHECK(recs[hist.size()].x == x0);
  for (int i = 1; i <= 3; ++i) CHECK((recs[hist.size() + i].x - x0).norm() == doctest::Approx(kGlobalGradStencil));
}

TEST_CASE("framework step failure leaves the history untouched") {
  const auto hist = sample_history(smooth_fn, 3, 2, -1, 1, 17);
  NoisyFunction f = [](const Vec& x) { return smooth_fn(x); };
  CHECK_THROWS_AS(framework_step(hist, FilterPolicy::standard(2), 0.0, EstimatorKind::Casg, 1e-3, 0.1, f, Vec::Zero(2)),
                  Error);
  CHECK(hist.size() == 3);
}

TEST_CASE("model Hessian is nearly as good as the exact one for CASG on a quadratic") {
  const Mat hq = (Mat(2, 2) << 4.0, 1.0, 1.0, 0.05).finished();
  const Vec g = (Vec(2) << 0.3, -0.2).finished();
  auto fq = [&](const Vec& x) { return 0.5 * x.dot(hq * x) + g.dot(x); };
  const auto hist = sample_history(fq, 400, 2, -1, 1, 18);
  const Vec x0 = (Vec(2) << 0.1, 0.2).finished();
  const Vec grad = hq * x0 + g;
  const double sigma = 1e-3, h = 0.5;
  const auto exact_sample = casg_sample_set(CurvatureSpec(hq, sigma, h), x0).first;

  double mse_model = 0.0, mse_exact = 0.0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    Rng a(derive_seed(19, t)), b(derive_seed(19, t));
    NoisyFunction fa = [&](const Vec& x) { return fq(x) + sigma * a.normal(); };
    NoisyFunction fb = [&](const Vec& x) { return fq(x) + sigma * b.normal(); };
    const auto r = framework_step(hist, FilterPolicy::standard(2), 0.0, EstimatorKind::Casg, sigma, h, fa, x0);
    mse_model += (r.gradient - grad).squaredNorm();
    mse_exact += (fd_estimate(fb, exact_sample).gradient - grad).squaredNorm();
  }
  CHECK(mse_model <= 2.0 * mse_exact);
}
