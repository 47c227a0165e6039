#include "doctest.h"

#include <cmath>

#include "casg/error.hpp"
#include "casg/rng.hpp"
#include "casg/simplex.hpp"
#include "oracles.hpp"

using namespace casg;

namespace {

Mat mat2(double a, double b, double c, double d) {
  Mat m(2, 2);
  m << a, b, c, d;
  return m;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Mat random_feasible(int d, Rng& rng, double h) {
  const Mat u = oracle::random_orthogonal(d, rng);
  const Mat v = oracle::random_orthogonal(d, rng);
  Vec s(d);
  for (int i = 0; i < d; ++i) s(i) = h * std::pow(10.0, rng.uniform(-2.0, 0.0));
  return u * s.asDiagonal() * v.transpose();
}

}  // namespace

TEST_CASE("difference matrix columns are offsets from the base point") {
  SampleSet unit(vec2(0, 0), {vec2(1, 0), vec2(0, 1)});
  CHECK(difference_matrix(unit).matrix().isApprox(Mat::Identity(2, 2), 0.0));

  SampleSet general(vec2(0, 0), {vec2(0.3, -1.2), vec2(2.5, 0.7)});
  CHECK(difference_matrix(general).matrix() == mat2(0.3, 2.5, -1.2, 0.7));

  SampleSet repeated(vec2(1, 1), {vec2(1, 1), vec2(2, 1)});
  const auto s = difference_matrix(repeated);
  CHECK(s.matrix() == mat2(0, 1, 0, 0));
  CHECK(s.singular());
  CHECK_THROWS_AS(s.solve_transpose(vec2(1, 1)), Error);
  try {
    s.solve_transpose(vec2(1, 1));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularDifferenceMatrix);
  }
}

TEST_CASE("sample set rejects a wrong point count") {
  CHECK_THROWS_AS(SampleSet(vec2(0, 0), {vec2(1, 0)}), Error);
  CHECK_THROWS_AS(SampleSet(vec2(0, 0), {vec2(1, 0), Vec::Zero(3)}), Error);
}

TEST_CASE("simplex gradient is exact for affine functions") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 7;
    Vec c(d), x0(d);
    for (int i = 0; i < d; ++i) {
      c(i) = rng.normal();
      x0(i) = rng.normal();
    }
    const double c0 = rng.normal();
    auto f = [&](const Vec& x) { return c0 + c.dot(x); };
    const Mat sm = random_feasible(d, rng, 1.0);
    const auto sample = SampleSet::from_differences(x0, sm);
    Vec df(d);
    for (int i = 0; i < d; ++i) df(i) = f(sample.point(i + 1)) - f(x0);
    const Vec g = simplex_gradient(difference_matrix(sample), df);
    CHECK((g - c).norm() <= 1e-10 * (1.0 + c.norm()));
  }
}

TEST_CASE("simplex gradient with S = hI is forward differences") {
  auto f = [](const Vec& x) { return std::sin(x(0)) + x(1) * x(1) * x(0); };
  const Vec x0 = vec2(0.4, -0.3);
  const double h = 1e-3;
  const auto sample = SampleSet::from_differences(x0, h * Mat::Identity(2, 2));
  Vec df(2);
  for (int i = 0; i < 2; ++i) df(i) = f(sample.point(i + 1)) - f(x0);
  const Vec g = simplex_gradient(difference_matrix(sample), df);
  for (int i = 0; i < 2; ++i) {
    Vec xp = x0;
    xp(i) += h;
    CHECK(g(i) == doctest::Approx((f(xp) - f(x0)) / h).epsilon(1e-14));
  }
}

TEST_CASE("simplex gradient of x squared on the diagonal stencil") {
  const Mat sm = mat2(1, 1, 1, -1);
  const auto s = DifferenceMatrix(sm);
  const Vec df = vec2(1, 1);  // f(1,1) − f(0,0), f(1,−1) − f(0,0)
  const Vec g = simplex_gradient(s, df);
  // Oracle: direct solve of Sᵀg = δf, and the Taylor form ∇f + ½S^{-T}diag(SᵀHS).
  const Vec direct = sm.transpose().fullPivLu().solve(df);
  CHECK((g - direct).norm() <= 1e-15);
  CHECK(g(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(g(1)) <= 1e-15);
  const Mat h = mat2(2, 0, 0, 0);
  const Vec taylor = 0.5 * sm.transpose().fullPivLu().solve(Vec((sm.transpose() * h * sm).diagonal()));
  CHECK((g - taylor).norm() <= 1e-15);
}

TEST_CASE("noise error examples") {
  const DifferenceMatrix id(Mat::Identity(2, 2));
  CHECK(noise_error(id, 0.1) == doctest::Approx(0.04).epsilon(1e-14));
  Rng rng(3);
  const DifferenceMatrix r(random_feasible(3, rng, 1.0));
  CHECK(noise_error(r, 0.0) == 0.0);
}

TEST_CASE("noise error matches a Monte-Carlo variance of the estimate") {
  Rng rng(5);
  Mat sm(3, 3);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) sm(i, j) = rng.normal();
  }
  const DifferenceMatrix s(sm);
  const double sigma = 0.5;
  const double analytic = noise_error(s, sigma);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  Rng noise(99);
  const Mat st = sm.transpose();
  const Eigen::FullPivLU<Mat> lu(st);
  for (int t = 0; t < n; ++t) {
    const double e0 = noise.normal();
    Vec de(3);
    for (int i = 0; i < 3; ++i) de(i) = sigma * (noise.normal() - e0);
    const double v = lu.solve(de).squaredNorm();
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / (n - 1));
  CHECK(std::abs(mean - analytic) <= 3.0 * se);
}

TEST_CASE("approximation error examples") {
  const double h = 1.0;
  for (double k : {1.0, 0.5, -3.0}) {
    Mat hess = Mat::Zero(2, 2);
    hess(0, 0) = k;
    hess(1, 1) = 1.0;
    const DifferenceMatrix s(h * Mat::Identity(2, 2));
    CHECK(approximation_error(s, hess) == doctest::Approx(0.25 * h * h * (k * k + 1)).epsilon(1e-14));
  }
  Rng rng(8);
  const DifferenceMatrix r(random_feasible(4, rng, 1.0));
  CHECK(approximation_error(r, Mat::Zero(4, 4)) == 0.0);

  const double c = 1.0 / std::sqrt(2.0);
  const DifferenceMatrix zs(c * mat2(1, 1, 1, -1));
  CHECK(approximation_error(zs, mat2(-1, 0, 0, 1)) <= 1e-30);
}

TEST_CASE("objective examples") {
  const auto spec = CurvatureSpec::from_diagonal(vec2(0.3, 1.0), 0.1, 1.0);
  CHECK(objective(DifferenceMatrix(mat2(0, 1, 0, 0)), spec) == kInfinity);
  CHECK(objective(DifferenceMatrix(mat2(1, 1, 1, 1 + 1e-14)), spec) == kInfinity);

  const double h = 0.7, k = 0.3, sigma = 0.1;
  const auto spec2 = CurvatureSpec::from_diagonal(vec2(k, 1.0), sigma, h);
  const DifferenceMatrix s(h * Mat::Identity(2, 2));
  CHECK(objective(s, spec2) ==
        doctest::Approx(0.25 * h * h * (k * k + 1) + 4 * sigma * sigma / (h * h)).epsilon(1e-13));

  CHECK(objective(DifferenceMatrix(1.01 * h * Mat::Identity(2, 2)), spec2) == kInfinity);
  CHECK(std::isfinite(objective(DifferenceMatrix(h * (1 + 1e-13) * Mat::Identity(2, 2)), spec2)));
}

TEST_CASE("quadratic exactness: squared error equals the approximation error") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 6;
    const Mat h = oracle::random_symmetric(d, rng);
    Vec g(d), x0(d);
    for (int i = 0; i < d; ++i) {
      g(i) = rng.normal();
      x0(i) = rng.normal();
    }
    auto f = [&](const Vec& x) {
      const Vec dx = x - x0;
      return 0.5 * dx.dot(h * dx) + g.dot(dx);
    };
    const Mat sm = random_feasible(d, rng, 0.5);
    const auto sample = SampleSet::from_differences(x0, sm);
    Vec df(d);
    for (int i = 0; i < d; ++i) df(i) = f(sample.point(i + 1)) - f(x0);
    const DifferenceMatrix s = difference_matrix(sample);
    const double err = (simplex_gradient(s, df) - g).squaredNorm();
    const double ae = approximation_error(s, h);
    CHECK(std::abs(err - ae) <= 1e-10 * std::max(ae, 1e-6));
  }
}

TEST_CASE("objective is invariant under rotation into the eigenbasis and under negation") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 7;
    const Mat hm = oracle::random_symmetric(d, rng, std::pow(10.0, rng.uniform(-2, 2)));
    const double sigma = std::pow(10.0, rng.uniform(-4, 0));
    const double h = std::pow(10.0, rng.uniform(-2, 1));
    const CurvatureSpec spec(hm, sigma, h);
    const Mat sm = random_feasible(d, rng, h);
    const double l = objective(DifferenceMatrix(sm), spec);
    const auto diag = CurvatureSpec::from_diagonal(spec.eigenvalues(), sigma, h);
    const auto neg = CurvatureSpec::from_diagonal(-spec.eigenvalues(), sigma, h);
    const DifferenceMatrix rotated(spec.rotation().transpose() * sm);
    CHECK(std::abs(l - objective(rotated, diag)) <= 1e-10 * (1 + l));
    CHECK(std::abs(l - objective(rotated, neg)) <= 1e-10 * (1 + l));
  }
}

TEST_CASE("curvature spec decomposition") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial;
    const Mat hm = oracle::random_symmetric(d, rng, 3.0);
    const CurvatureSpec spec(hm, 0.1, 1.0);
    const Mat& r = spec.rotation();
    CHECK((r.transpose() * r - Mat::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-10);
    const Mat back = r * spec.eigenvalues().asDiagonal() * r.transpose();
    CHECK((back - hm).cwiseAbs().maxCoeff() <= 1e-8 * (1 + hm.cwiseAbs().maxCoeff()));
    for (int i = 1; i < d; ++i) CHECK(spec.eigenvalues()(i - 1) <= spec.eigenvalues()(i));
  }
  CHECK_THROWS_AS(CurvatureSpec(mat2(1, 2, 0, 1), 0.1, 1.0), Error);
  CHECK_THROWS_AS(CurvatureSpec(Mat::Identity(2, 2), -0.1, 1.0), Error);
  CHECK_THROWS_AS(CurvatureSpec(Mat::Identity(2, 2), 0.1, 0.0), Error);
  Mat bad = Mat::Identity(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(CurvatureSpec(bad, 0.1, 1.0), Error);
}

TEST_CASE("evaluation history is append-only with increasing steps") {
  EvaluationHistory h;
  h.append(vec2(0, 0), 1.0);
  h.append(vec2(1, 0), 2.0);
  CHECK(h.last_step() == 2);
  h.append(vec2(1, 1), 3.0, 10);
  CHECK(h.last_step() == 10);
  CHECK_THROWS_AS(h.append(vec2(2, 2), 4.0, 10), Error);
  CHECK_THROWS_AS(h.append(Vec::Zero(3), 4.0), Error);
  CHECK(h.size() == 3);

  EvaluationHistory other;
  other.append(vec2(5, 5), 7.0, 1);
  other.append(vec2(6, 6), 8.0, 2);
  h.extend(other);
  REQUIRE(h.size() == 5);
  CHECK(h.records()[3].step == 11);
  CHECK(h.records()[4].step == 12);
  CHECK(h.records()[4].y == 8.0);
}

TEST_CASE("Monte-Carlo MSE") {
  SUBCASE("zero-noise affine problem") {
    const Vec c = vec2(1.5, -2.0);
    auto f = [&](const Vec& x) { return 3.0 + c.dot(x); };
    const Vec x0 = vec2(0.2, 0.1);
    GradientEstimator est = [](const NoisyFunction& fn, const Vec& x) {
      const auto sample = SampleSet::from_differences(x, 0.1 * Mat::Identity(2, 2));
      Vec df(2);
      const double f0 = fn(x);
      for (int i = 0; i < 2; ++i) df(i) = fn(sample.point(i + 1)) - f0;
      return simplex_gradient(difference_matrix(sample), df);
    };
    const auto r = mse_monte_carlo(est, f, 0.0, c, x0, 100, 1);
    CHECK(r.mean <= 1e-20);
  }
  SUBCASE("quadratic toy with optimal forward differences") {
    const double k = 0.01, sigma = 0.1, h = 1.0;
    auto f = [&](const Vec& x) { return k * x(0) * x(0) + x(1) * x(1); };
    const Vec x0 = vec2(0.3, -0.2);
    const Vec grad = vec2(2 * k * x0(0), 2 * x0(1));
    Vec t(2);
    t(0) = std::min(h, std::pow(8 * sigma * sigma / (4 * k * k), 0.25));
    t(1) = std::min(h, std::pow(8 * sigma * sigma / 4.0, 0.25));
    const Mat sm = t.asDiagonal();
    GradientEstimator est = [&](const NoisyFunction& fn, const Vec& x) {
      const auto sample = SampleSet::from_differences(x, sm);
      Vec df(2);
      const double f0 = fn(x);
      for (int i = 0; i < 2; ++i) df(i) = fn(sample.point(i + 1)) - f0;
      return simplex_gradient(difference_matrix(sample), df);
    };
    Mat hess = Mat::Zero(2, 2);
    hess(0, 0) = 2 * k;
    hess(1, 1) = 2;
    const double l = objective(DifferenceMatrix(sm), CurvatureSpec(hess, sigma, h));
    const auto r = mse_monte_carlo(est, f, sigma, grad, x0, 100000, 7);
    CHECK(std::abs(r.mean - l) <= 3 * r.std_error);
    const auto again = mse_monte_carlo(est, f, sigma, grad, x0, 100000, 7);
    CHECK(again.mean == r.mean);
    CHECK(again.std_error == r.std_error);
  }
  SUBCASE("errors") {
    auto f = [](const Vec& x) { return x.sum(); };
    GradientEstimator bad = [](const NoisyFunction&, const Vec&) -> Vec {
      throw Error(ErrorKind::DegenerateGeometry, "boom");
    };
    CHECK_THROWS_AS(mse_monte_carlo(bad, f, 0.1, Vec::Ones(2), Vec::Zero(2), 1, 1), Error);
    try {
      mse_monte_carlo(bad, f, 0.1, Vec::Ones(2), Vec::Zero(2), 10, 1);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DegenerateGeometry);
      CHECK(std::string(e.what()).find("trial") != std::string::npos);
    }
  }
}
