#include "casg/casg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "casg/error.hpp"

namespace casg {

namespace {

// Positive curvatures at or below this are pinned to the boundary together
// with the non-positive ones; σ√(2dλ/(aD)) would overflow for them and the
// unconstrained value exceeds h² anyway.
constexpr double kTinyCurvature = 1e-300;

bool pinned(double dj) { return dj <= kTinyCurvature; }

// 27q² − 4p³ with the rounding error of both products folded back in.
double cubic_discriminant(double p, double q) {
  const double qq = q * q;
  const double qq_err = std::fma(q, q, -qq);
  const double pp = p * p;
  const double pp_err = std::fma(p, p, -pp);
  const double ppp = pp * p;
  const double ppp_err = std::fma(pp, p, -ppp) + pp_err * p;
  return (27.0 * qq - 4.0 * ppp) + (27.0 * qq_err - 4.0 * ppp_err);
}

LambdaStep lambda_next_unchecked(int j, int dim, double d_next, double sigma, double h, double c1,
                                 double c2) {
  const double n = static_cast<double>(dim);
  if (j == 0) {
    const double d1 = d_next;
    const double c = std::max(0.0, c1 - std::sqrt(d1));
    const double inner = c * std::sqrt(8.0 * d1 * (n + 1.0) + c * c) + 2.0 * d1 * (n + 1.0) + c * c;
    const double a = std::sqrt(2.0 * (n * sigma * sigma / d1) * inner);
    const double lambda1 = (2.0 * n / (a * d1)) * (a * a / (4.0 * n) + sigma * sigma * (n + 1.0));
    return {lambda1, a};
  }
  const double h2 = h * h;
  const double q = sigma * std::sqrt(2.0 * n * h2) * c1;
  const double p = h2 * c2;
  const double x = positive_cubic_root(p, q);
  const double a = x * x;
  return {sigma * std::sqrt(2.0 * n * h2 / (a * d_next)), a};
}

double lower_bound_diag(const Vec& d, const Vec& sig, double sigma, double h) {
  const auto n = d.size();
  double smax = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(sig(i) > 0.0) || sig(i) > h * (1.0 + kRadiusSlack)) return kInfinity;
    smax = std::max(smax, sig(i));
  }
  const Vec s2 = sig.array().square();
  const double a = d.dot(s2);
  const double smax2 = smax * smax;
  const double nn = static_cast<double>(n);
  return a * a / (4.0 * nn * smax2) + sigma * sigma * s2.cwiseInverse().sum() +
         sigma * sigma * nn / smax2;
}

}  // namespace

double positive_cubic_root(double p, double q) {
  if (!(q > 0.0) || !std::isfinite(p) || !std::isfinite(q)) {
    throw Error(ErrorKind::InvalidActiveSet, "cubic root requires q > 0");
  }
  double x;
  const double disc = cubic_discriminant(p, q);
  if (disc >= 0.0) {
    const double w = 9.0 * q + std::sqrt(3.0) * std::sqrt(disc);
    const double cw = std::cbrt(w);
    x = std::cbrt(2.0 / 3.0) * p / cw + cw / std::cbrt(18.0);
  } else {
    // Three real roots (p > 0); the k = 0 trigonometric root is the positive one.
    const double arg = std::clamp(9.0 * q / std::sqrt(12.0 * p * p * p), -1.0, 1.0);
    const double theta = std::acos(arg);
    x = 2.0 * std::sqrt(p / 3.0) * std::cos(theta / 3.0);
  }
  if (!(x > 0.0) || !std::isfinite(x)) {
    // Cancellation wiped out the radical form; x(x² − p) = q gives a start.
    x = p < 0.0 ? q / -p : std::cbrt(q);
  }
  for (int it = 0; it < 2; ++it) {
    const double g = x * x * x - p * x - q;
    const double dg = 3.0 * x * x - p;
    if (!(dg > 0.0)) break;
    const double nx = x - g / dg;
    if (!(nx > 0.0)) break;
    const double ng = nx * nx * nx - p * nx - q;
    if (std::abs(ng) >= std::abs(g)) break;
    x = nx;
  }
  return x;
}

LambdaStep get_lambda_next(int active_count, std::span<const double> d, double sigma, double h,
                           double c1, double c2) {
  const int dim = static_cast<int>(d.size());
  const int j = active_count;
  if (dim == 0 || j < 0 || j >= dim) {
    throw Error(ErrorKind::InvalidActiveSet, "active set size must lie in [0, d)");
  }
  if (!(sigma > 0.0) || !(h > 0.0)) {
    throw Error(ErrorKind::InvalidActiveSet, "sigma and h must be positive");
  }
  double sum = 0.0;
  int k = 0;
  for (int i = 0; i < dim; ++i) {
    if (!std::isfinite(d[i])) throw Error(ErrorKind::InvalidActiveSet, "non-finite curvature");
    if (i > 0 && d[i] < d[i - 1]) throw Error(ErrorKind::InvalidActiveSet, "D must be increasing");
    sum += d[i];
    if (pinned(d[i])) ++k;
  }
  if (!(sum > 0.0)) throw Error(ErrorKind::InvalidActiveSet, "sum of D must be positive");
  if (j < k) {
    throw Error(ErrorKind::InvalidActiveSet,
                "active set must contain every non-positive curvature (J=" + std::to_string(j) +
                    " < " + std::to_string(k) + ")");
  }
  if (j >= 1 && !(c1 > 0.0)) throw Error(ErrorKind::InvalidActiveSet, "c1 must be positive");
  return lambda_next_unchecked(j, dim, d[j], sigma, h, c1, c2);
}

SigmaSolution get_sigma_star(const Vec& d, double sigma, double h) {
  const int dim = static_cast<int>(d.size());
  if (dim == 0) throw Error(ErrorKind::InvalidArgument, "empty curvature vector");
  if (!d.allFinite() || !std::isfinite(sigma) || !std::isfinite(h)) {
    throw Error(ErrorKind::NonFiniteInput, "non-finite input to get_sigma_star");
  }
  if (!(sigma > 0.0) || !(h > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "sigma and h must be positive");
  }
  double sum = 0.0;
  int k = 0;
  for (int i = 0; i < dim; ++i) {
    if (i > 0 && d(i) < d(i - 1)) throw Error(ErrorKind::InvalidArgument, "D must be increasing");
    sum += d(i);
    if (pinned(d(i))) ++k;
  }
  if (sum < 0.0) throw Error(ErrorKind::NegativeTrace, "sum of curvatures is negative");

  const double h2 = h * h;
  const double n = static_cast<double>(dim);
  SigmaSolution out;
  out.lambda = Vec::Constant(dim, h2);
  if (sum == 0.0) {
    out.a = 0.0;
    out.active_count = dim;
    return out;
  }

  std::vector<double> root_suffix(static_cast<std::size_t>(dim) + 1, 0.0);
  for (int i = dim - 1; i >= k; --i) root_suffix[i] = root_suffix[i + 1] + std::sqrt(d(i));

  double c2 = 0.0;
  for (int i = 0; i < k; ++i) c2 += d(i);

  for (int j = k; j < dim; ++j) {
    const LambdaStep step =
        lambda_next_unchecked(j, dim, d(j), sigma, h, root_suffix[j], c2);
    const double a = step.a;
    if (j == 0) {
      // No O(1) shortcut here: every coordinate of the candidate is checked.
      const double lambda1 = step.lambda_next;
      bool feasible = lambda1 <= h2;
      Vec cand(dim);
      cand(0) = lambda1;
      for (int i = 1; i < dim && feasible; ++i) {
        cand(i) = sigma * std::sqrt(2.0 * n * lambda1 / (a * d(i)));
        feasible = cand(i) <= h2;
      }
      if (feasible) {
        out.lambda = std::move(cand);
        out.a = a;
        out.active_count = 0;
        return out;
      }
    } else if (step.lambda_next <= h2) {
      out.lambda(j) = step.lambda_next;
      for (int i = j + 1; i < dim; ++i) out.lambda(i) = sigma * std::sqrt(2.0 * n * h2 / (a * d(i)));
      out.a = a;
      out.active_count = j;
      return out;
    }
    c2 += d(j);
  }
  out.a = h2 * sum;
  out.active_count = dim;
  return out;
}

bool is_power_of_two(int d) { return d >= 1 && std::has_single_bit(static_cast<unsigned>(d)); }

Mat hadamard(int d, int positive_column) {
  if (!is_power_of_two(d)) {
    throw Error(ErrorKind::NotPowerOfTwo, "Hadamard order " + std::to_string(d) + " is not a power of two");
  }
  if (positive_column < 0 || positive_column >= d) {
    throw Error(ErrorKind::InvalidArgument, "Hadamard column index out of range");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Mat m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const bool odd = std::popcount(static_cast<unsigned>(i & j)) % 2 != 0;
      m(i, j) = odd ? -scale : scale;
    }
  }
  if (positive_column != 0) {
    m.col(0).swap(m.col(positive_column));
    m.row(0).swap(m.row(positive_column));
  }
  return m;
}

double lower_bound(const CurvatureSpec& spec, const Vec& sigma_diag) {
  if (sigma_diag.size() != spec.dim()) throw Error(ErrorKind::InvalidArgument, "dimension mismatch");
  return lower_bound_diag(spec.eigenvalues(), sigma_diag, spec.sigma(), spec.h());
}

namespace detail {

DiagonalSolution solve_diagonal(const Vec& d, double sigma, double h) {
  const int n = static_cast<int>(d.size());
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "empty curvature vector");
  if (!d.allFinite() || !std::isfinite(sigma) || !std::isfinite(h)) {
    throw Error(ErrorKind::NonFiniteInput, "non-finite curvature, sigma or h");
  }
  if (!(sigma > 0.0) || !(h > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma and h must be positive");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return d(x) < d(y); });
  Vec sorted(n);
  for (int i = 0; i < n; ++i) sorted(i) = d(order[i]);

  DiagonalSolution out;
  out.negated = sorted.sum() < 0.0;
  Vec work = sorted;
  if (out.negated) work = -sorted.reverse();

  const SigmaSolution sol = get_sigma_star(work, sigma, h);
  Vec sig_sorted(n);
  for (int i = 0; i < n; ++i) {
    const double s = i < sol.active_count ? h : std::sqrt(sol.lambda(i));
    sig_sorted(out.negated ? n - 1 - i : i) = s;
  }
  out.sigma.resize(n);
  for (int i = 0; i < n; ++i) out.sigma(order[i]) = sig_sorted(i);

  Eigen::Index k = 0;
  out.sigma.maxCoeff(&k);  // first index on ties
  out.v = hadamard(n, static_cast<int>(k));
  out.s = out.sigma.asDiagonal() * out.v.transpose();
  out.objective = lower_bound_diag(d, out.sigma, sigma, h);
  return out;
}

}  // namespace detail

std::pair<SampleSet, CasgResult> casg_sample_set(const CurvatureSpec& spec, const Vec& x0) {
  const int n = spec.dim();
  if (x0.size() != n) throw Error(ErrorKind::InvalidArgument, "x0 dimension mismatch");
  if (!x0.allFinite()) throw Error(ErrorKind::NonFiniteInput, "x0 has non-finite entries");
  if (!is_power_of_two(n)) {
    throw Error(ErrorKind::NotPowerOfTwo, "dimension " + std::to_string(n) + " is not a power of two");
  }
  detail::DiagonalSolution sol = detail::solve_diagonal(spec.eigenvalues(), spec.sigma(), spec.h());
  Mat s = spec.rotation() * sol.s;
  SampleSet sample = SampleSet::from_differences(x0, s);
  CasgResult result{DifferenceMatrix(std::move(s)), Mat::Identity(n, n), std::move(sol.sigma),
                    std::move(sol.v), sol.objective, sol.negated};
  return {std::move(sample), std::move(result)};
}

}  // namespace casg
