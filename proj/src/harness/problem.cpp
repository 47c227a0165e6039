#include "casg/harness/problem.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "casg/error.hpp"

namespace casg::harness {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec filled(int d, double v) { return Vec::Constant(d, v); }

}  // namespace

NoisyOracle::NoisyOracle(const Problem& problem, double sigma, std::uint64_t seed)
    : problem_(&problem), sigma_(sigma), rng_(seed) {
  if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise sigma must be >= 0");
}

double NoisyOracle::operator()(const Vec& x) {
  ++evaluations_;
  const double eps = rng_.normal();
  return problem_->eval(x) + sigma_ * eps;
}

Mat fixed_rotation(int dim, std::uint64_t seed) {
  Rng rng(seed);
  Mat a(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) a(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(dim, dim);
  // Fix column signs so the factor does not depend on QR conventions.
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Problem ackley(int dim) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "ackley needs dim >= 1");
  Problem p;
  p.name = "ackley_" + std::to_string(dim);
  p.dim = dim;
  p.lower = filled(dim, -0.5);
  p.upper = filled(dim, 0.5);
  p.start = filled(dim, 0.3);
  p.noise_sigma = 1e-5;
  p.f_star = 0.0;
  const double n = dim;
  p.eval = [n](const Vec& x) {
    const double r = std::sqrt(x.squaredNorm() / n);
    double c = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) c += std::cos(kTwoPi * x(i));
    return -20.0 * std::exp(-0.2 * r) - std::exp(c / n) + 20.0 + std::numbers::e;
  };
  p.gradient = [n](const Vec& x) {
    const auto d = x.size();
    const double r = std::sqrt(x.squaredNorm() / n);
    double c = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) c += std::cos(kTwoPi * x(i));
    const double ec = std::exp(c / n);
    Vec g(d);
    const double radial = r > 0.0 ? 4.0 * std::exp(-0.2 * r) / (n * r) : 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      g(i) = radial * x(i) + (kTwoPi / n) * ec * std::sin(kTwoPi * x(i));
    }
    return g;
  };
  p.hessian = [n](const Vec& x) {
    const auto d = x.size();
    Mat hs = Mat::Zero(d, d);
    const double r = std::sqrt(x.squaredNorm() / n);
    if (r > 0.0) {
      const double e = std::exp(-0.2 * r);
      const double phi = 4.0 * e / (n * r);
      const double dphi = 4.0 / n * e * (-0.2 * r - 1.0) / (r * r);
      hs.diagonal().array() += phi;
      hs.noalias() += (dphi / (n * r)) * x * x.transpose();
    }
    double c = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) c += std::cos(kTwoPi * x(i));
    const double ec = std::exp(c / n);
    Vec s(d);
    for (Eigen::Index i = 0; i < d; ++i) s(i) = std::sin(kTwoPi * x(i));
    const double k = kTwoPi / n * ec;
    hs.noalias() -= (k * kTwoPi / n) * s * s.transpose();
    for (Eigen::Index i = 0; i < d; ++i) hs(i, i) += k * kTwoPi * std::cos(kTwoPi * x(i));
    return Mat(0.5 * (hs + hs.transpose()));
  };
  return p;
}

Problem quadratic(std::string name, const Mat& h, const Vec& g, const Vec& start, double box) {
  const int d = static_cast<int>(g.size());
  if (h.rows() != d || h.cols() != d || start.size() != d) {
    throw Error(ErrorKind::InvalidArgument, "quadratic dimension mismatch");
  }
  Problem p;
  p.name = std::move(name);
  p.dim = d;
  p.lower = start.array() - box;
  p.upper = start.array() + box;
  p.start = start;
  p.noise_sigma = 1e-5;
  const Mat hs = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(hs);
  if (eig.eigenvalues().minCoeff() > 0.0) p.f_star = -0.5 * g.dot(hs.ldlt().solve(g));
  p.eval = [hs, g](const Vec& x) { return 0.5 * x.dot(hs * x) + g.dot(x); };
  p.gradient = [hs, g](const Vec& x) { return Vec(hs * x + g); };
  p.hessian = [hs](const Vec&) { return hs; };
  return p;
}

Problem quad_k(double k) {
  Mat h(2, 2);
  h << 2.0 * k, 0.0, 0.0, 2.0;
  Problem p = quadratic("quad_k", h, Vec::Zero(2), Vec::Zero(2), 1.0);
  p.noise_sigma = 0.01;
  return p;
}

Problem quad_well_4() {
  const Mat q = fixed_rotation(4, 0x5157454c4cULL);
  Vec ev(4);
  ev << 1.0, 2.0, 3.0, 4.0;
  const Mat h = q * ev.asDiagonal() * q.transpose();
  Vec g(4);
  g << 1.0, -1.0, 0.5, 2.0;
  return quadratic("quad_well_4", h, g, Vec::Constant(4, 1.5), 2.0);
}

Problem quad_ill_8() {
  const Mat q = fixed_rotation(8, 0x494c4cULL);
  Vec ev(8);
  for (int i = 0; i < 8; ++i) ev(i) = std::pow(10.0, -2.0 + 4.0 * i / 7.0);
  const Mat h = q * ev.asDiagonal() * q.transpose();
  Vec g(8);
  g << 1.0, -0.5, 0.25, 0.0, 0.5, -1.0, 0.75, 0.1;
  g *= 0.1;
  return quadratic("quad_ill_8", h, g, Vec::Constant(8, 1.0), 2.0);
}

Problem quartic_indef_4() {
  const Mat q = fixed_rotation(4, 0x51554152ULL);
  Vec c(4);
  c << -1.0, -0.5, 1.0, 2.0;
  Vec b(4);
  b << 0.1, -0.2, 0.3, 0.05;
  Problem p;
  p.name = "quartic_indef_4";
  p.dim = 4;
  p.start = Vec::Constant(4, 0.2);
  p.lower = p.start.array() - 2.0;
  p.upper = p.start.array() + 2.0;
  p.noise_sigma = 1e-5;
  p.eval = [q, c, b](const Vec& x) {
    const Vec y = q.transpose() * x;
    double v = b.dot(y);
    for (int i = 0; i < 4; ++i) v += 0.25 * std::pow(y(i), 4) + 0.5 * c(i) * y(i) * y(i);
    return v;
  };
  p.gradient = [q, c, b](const Vec& x) {
    const Vec y = q.transpose() * x;
    Vec gy(4);
    for (int i = 0; i < 4; ++i) gy(i) = y(i) * y(i) * y(i) + c(i) * y(i) + b(i);
    return Vec(q * gy);
  };
  p.hessian = [q, c](const Vec& x) {
    const Vec y = q.transpose() * x;
    Vec dy(4);
    for (int i = 0; i < 4; ++i) dy(i) = 3.0 * y(i) * y(i) + c(i);
    const Mat hs = q * dy.asDiagonal() * q.transpose();
    return Mat(0.5 * (hs + hs.transpose()));
  };
  return p;
}

Problem rosenbrock(int dim) {
  if (dim < 2) throw Error(ErrorKind::InvalidArgument, "rosenbrock needs dim >= 2");
  Problem p;
  p.name = "rosenbrock_" + std::to_string(dim);
  p.dim = dim;
  p.start = Vec(dim);
  for (int i = 0; i < dim; ++i) p.start(i) = i % 2 == 0 ? -1.2 : 1.0;
  p.lower = filled(dim, -2.0);
  p.upper = filled(dim, 2.0);
  p.noise_sigma = 1e-5;
  p.f_star = 0.0;
  p.eval = [](const Vec& x) {
    double v = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      const double a = x(i + 1) - x(i) * x(i);
      const double b = 1.0 - x(i);
      v += 100.0 * a * a + b * b;
    }
    return v;
  };
  p.gradient = [](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      const double a = x(i + 1) - x(i) * x(i);
      g(i) += -400.0 * x(i) * a - 2.0 * (1.0 - x(i));
      g(i + 1) += 200.0 * a;
    }
    return g;
  };
  p.hessian = [](const Vec& x) {
    const auto d = x.size();
    Mat hs = Mat::Zero(d, d);
    for (Eigen::Index i = 0; i + 1 < d; ++i) {
      hs(i, i) += 1200.0 * x(i) * x(i) - 400.0 * x(i + 1) + 2.0;
      hs(i, i + 1) += -400.0 * x(i);
      hs(i + 1, i) += -400.0 * x(i);
      hs(i + 1, i + 1) += 200.0;
    }
    return hs;
  };
  return p;
}

ColonCoefficients ColonCoefficients::illustrative() {
  ColonCoefficients c;
  c.values.resize(kCount);
  c.values << 0.1, 0.3, 0.69, 0.1, 0.3, 0.397, 0.1, 0.1, 0.001, 0.1, 0.01;
  return c;
}

const std::vector<std::string>& ColonCoefficients::names() {
  static const std::vector<std::string> n{"alpha1", "alpha2", "alpha3", "beta1", "beta2", "beta3",
                                          "gamma",  "k0",     "c1",     "m0",    "m1"};
  return n;
}

double colon_n0(const Vec& c, const ColonSettings& s, std::vector<double>* trace,
                int record_every) {
  if (c.size() != ColonCoefficients::kCount) {
    throw Error(ErrorKind::InvalidArgument, "colon model needs 11 coefficients");
  }
  const double a1 = c(0), a2 = c(1), a3 = c(2);
  const double b1 = c(3), b2 = c(4), b3 = c(5);
  const double gamma = c(6), k0 = c(7), c1 = c(8), m0 = c(9), m1 = c(10);
  const long steps = std::lround(s.horizon / s.step);
  double n0 = s.n0, n1 = s.n1, n2 = s.n2;
  if (trace) {
    trace->clear();
    trace->push_back(n0);
  }
  for (long i = 0; i < steps; ++i) {
    const double sat0 = k0 * n0 * n0 / (1.0 + m0 * n0);
    const double sat1 = c1 * n1 * n1 / (1.0 + m1 * n1);
    const double d0 = (a3 - a1 - a2) * n0 - sat0;
    const double d1 = (b3 - b1 - b2) * n1 + a2 * n0 - sat1 + sat0;
    const double d2 = -gamma * n2 + b2 * n1 + sat1;
    n0 += s.step * d0;
    n1 += s.step * d1;
    n2 += s.step * d2;
    if (!std::isfinite(n0) || !std::isfinite(n1) || !std::isfinite(n2)) {
      throw Error(ErrorKind::NonFiniteState,
                  "colon trajectory diverged at t=" + std::to_string((i + 1) * s.step));
    }
    if (trace && (i + 1) % record_every == 0) trace->push_back(n0);
  }
  return n0;
}

Problem colon_ode(const ColonCoefficients& defaults, const ColonSettings& settings) {
  if (defaults.values.size() != ColonCoefficients::kCount || !(defaults.values.array() > 0.0).all()) {
    throw Error(ErrorKind::InvalidArgument, "colon coefficients must be 11 positive values");
  }
  Problem p;
  p.name = "colon_ode";
  p.dim = ColonCoefficients::kCount;
  p.start = defaults.values;
  p.lower = 0.9 * defaults.values;
  p.upper = 1.1 * defaults.values;
  p.noise_sigma = 1e-3;
  p.eval = [settings](const Vec& x) { return colon_n0(x, settings); };
  return p;
}

Problem colon_fit(const ColonCoefficients& reference, const ColonSettings& settings) {
  Problem p = colon_ode(reference, settings);
  p.name = "colon_fit";
  const Vec c_ref = reference.values;
  const double target = colon_n0(c_ref, settings);
  p.lower = Vec::Constant(p.dim, 0.9);
  p.upper = Vec::Constant(p.dim, 1.1);
  p.start = Vec(p.dim);
  for (int i = 0; i < p.dim; ++i) p.start(i) = (i % 2 == 0) ? 1.08 : 0.92;
  p.noise_sigma = 1e-6;
  p.eval = [settings, target, c_ref](const Vec& x) {
    const Vec inside = x.cwiseMax(0.9).cwiseMin(1.1);
    const double r = colon_n0(c_ref.cwiseProduct(inside), settings) / target - 1.0;
    return r * r + (x - inside).squaredNorm();
  };
  return p;
}

Problem make_problem(const std::string& name, int dim, double k) {
  if (name == "ackley") return ackley(dim > 0 ? dim : 8);
  if (name == "ackley_4") return ackley(4);
  if (name == "ackley_8") return ackley(8);
  if (name == "rosenbrock") return rosenbrock(dim > 0 ? dim : 4);
  if (name == "rosenbrock_4") return rosenbrock(4);
  if (name == "rosenbrock_8") return rosenbrock(8);
  if (name == "quad_k") return quad_k(k);
  if (name == "quad_well_4") return quad_well_4();
  if (name == "quad_ill_8") return quad_ill_8();
  if (name == "quartic_indef_4") return quartic_indef_4();
  if (name == "colon_ode") return colon_ode(ColonCoefficients::illustrative());
  if (name == "colon_fit") return colon_fit(ColonCoefficients::illustrative());
  throw Error(ErrorKind::Config, "unknown problem '" + name + "'");
}

std::vector<std::string> problem_names() {
  return {"ackley", "ackley_4", "ackley_8", "colon_fit", "colon_ode", "quad_ill_8", "quad_k",
          "quad_well_4", "quartic_indef_4", "rosenbrock", "rosenbrock_4", "rosenbrock_8"};
}

std::vector<std::string> dfo_problem_set() {
  return {"quad_well_4", "quad_ill_8", "quartic_indef_4", "ackley_4",
          "ackley_8",    "rosenbrock_4", "rosenbrock_8",  "colon_fit"};
}

}  // namespace casg::harness
