#pragma once

// Test problems for the experiment drivers.

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "casg/rng.hpp"
#include "casg/simplex.hpp"

namespace casg::harness {

struct Problem {
  std::string name;
  int dim = 0;
  Vec lower;  ///< sampling domain
  Vec upper;
  Vec start;  ///< optimization start point
  std::function<double(const Vec&)> eval;  ///< noiseless, deterministic
  std::function<Vec(const Vec&)> gradient;  ///< empty when not available in closed form
  std::function<Mat(const Vec&)> hessian;   ///< empty when not available in closed form
  double noise_sigma = 0.0;                 ///< default noise level
  double f_star = std::numeric_limits<double>::quiet_NaN();
};

/// f(x) + σε with ε ~ N(0, 1) drawn from a private stream; the i-th call gets
/// the i-th draw. Counts evaluations.
class NoisyOracle {
 public:
  NoisyOracle(const Problem& problem, double sigma, std::uint64_t seed);

  double operator()(const Vec& x);
  std::uint64_t evaluations() const { return evaluations_; }
  double sigma() const { return sigma_; }

 private:
  const Problem* problem_;
  double sigma_;
  Rng rng_;
  std::uint64_t evaluations_ = 0;
};

/// Ackley on [−0.5, 0.5]^dim with closed-form gradient and Hessian. The
/// gradient and Hessian at the cusp x = 0 are defined as 0.
Problem ackley(int dim);

/// ½xᵀHx + gᵀx.
Problem quadratic(std::string name, const Mat& h, const Vec& g, const Vec& start, double box);

/// k·x² + y² around the origin.
Problem quad_k(double k);

/// Rotated quadratic with eigenvalues 1..4.
Problem quad_well_4();
/// Rotated quadratic with eigenvalues log-spaced over [1e-2, 1e2].
Problem quad_ill_8();
/// Σ(¼yᵢ⁴ + ½qᵢyᵢ²) + bᵀy with y = Qᵀx and q = (−1, −0.5, 1, 2): indefinite
/// near the origin, bounded below.
Problem quartic_indef_4();
/// Chained Rosenbrock Σ 100(x_{i+1} − xᵢ²)² + (1 − xᵢ)².
Problem rosenbrock(int dim);

/// Colon cell-differentiation model; the variables are the 11 coefficients in
/// the order α₁ α₂ α₃ β₁ β₂ β₃ γ k₀ c₁ m₀ m₁.
struct ColonCoefficients {
  static constexpr int kCount = 11;
  Vec values;

  /// Illustrative values, not taken from any published table.
  static ColonCoefficients illustrative();
  static const std::vector<std::string>& names();
};

struct ColonSettings {
  double n0 = 1.0;
  double n1 = 100.0;
  double n2 = 100.0;
  double horizon = 100.0;
  double step = 0.01;
};

/// Explicit Euler trajectory of (N₀, N₁, N₂); returns N₀ at every `record_every`
/// steps (including t = 0) when `trace` is non-null, and N₀ at the horizon.
/// Throws NonFiniteState when the state stops being finite.
double colon_n0(const Vec& coefficients, const ColonSettings& settings = {},
                std::vector<double>* trace = nullptr, int record_every = 100);

/// Problem over the coefficient vector with domain ±10% of `defaults` and
/// noise σ = 1e-3. No closed-form derivatives.
Problem colon_ode(const ColonCoefficients& defaults, const ColonSettings& settings = {});

/// Calibration form for optimization over relative coefficients x = c / reference:
/// f(x) = (N₀(reference ⊙ clamp(x)) / N₀(reference) − 1)² + ‖x − clamp(x)‖²,
/// clamp onto [0.9, 1.1]^11. Starts at 1.08 / 0.92 in alternating coordinates,
/// noise σ = 1e-6. Finite everywhere.
Problem colon_fit(const ColonCoefficients& reference, const ColonSettings& settings = {});

/// Built-in problem by name. `dim` applies to ackley/rosenbrock, `k` to quad_k.
/// Throws Config for unknown names.
Problem make_problem(const std::string& name, int dim = 0, double k = 1.0);

std::vector<std::string> problem_names();

/// Problem set used for the optimization experiments.
std::vector<std::string> dfo_problem_set();

/// Deterministic orthogonal matrix from a fixed seed.
Mat fixed_rotation(int dim, std::uint64_t seed);

}  // namespace casg::harness
