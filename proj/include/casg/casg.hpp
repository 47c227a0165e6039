#pragma once

// Optimal sample sets for power-of-two dimensions.
//
// In the eigenbasis of H the optimal difference matrix is diag(√λ) Vᵀ with V
// a Hadamard matrix whose all-positive column sits at the largest singular
// value. λ solves a box-constrained scalar problem with a closed form per
// active set; the active sets are scanned in order and the first feasible
// candidate is the global minimizer.

#include <span>
#include <utility>

#include "casg/simplex.hpp"

namespace casg {

/// λ = diag(Σ²) aligned with D (increasing), a = Σᵢ Dᵢλᵢ, and the number of
/// leading coordinates pinned to h².
struct SigmaSolution {
  Vec lambda;
  double a = 0.0;
  int active_count = 0;
};

struct LambdaStep {
  double lambda_next = 0.0;
  double a = 0.0;
};

/// Candidate for active set {1..J}: λ_{J+1} and a.
///
/// `c1` = Σ_{i>J} √Dᵢ and `c2` = Σ_{i≤J} Dᵢ (unscaled). J = 0 uses the
/// quartic closed form, J ≥ 1 the positive root of x³ = c2h²·x + σ√(2dh²)·c1
/// with a = x². Throws InvalidActiveSet when the preconditions fail.
LambdaStep get_lambda_next(int active_count, std::span<const double> d, double sigma, double h,
                           double c1, double c2);

/// Positive root of x³ − p·x − q = 0 for q > 0 (exactly one exists).
double positive_cubic_root(double p, double q);

/// Unique minimizer of the Σ-objective for increasing D with Σ D ≥ 0.
/// Throws NegativeTrace when Σ D < 0.
SigmaSolution get_sigma_star(const Vec& d, double sigma, double h);

/// Sylvester Hadamard matrix of order d scaled to be orthogonal, with index 0
/// and `positive_column` exchanged in both rows and columns, so that row and
/// column `positive_column` are all positive and M·𝟏 = √d·e_k.
/// Throws NotPowerOfTwo.
Mat hadamard(int d, int positive_column);

bool is_power_of_two(int d);

/// a²/(4dΣ²max) + σ²Σ 1/Σᵢ² + σ²d/Σ²max with a = Σ DᵢΣᵢ², evaluated in the
/// eigenbasis of `spec` (U = I); +inf unless 0 < Σ ≤ h.
double lower_bound(const CurvatureSpec& spec, const Vec& sigma_diag);

struct CasgResult {
  DifferenceMatrix s_star;
  Mat u;       ///< identity in the eigenbasis
  Vec sigma;   ///< singular values, aligned with spec.eigenvalues()
  Mat v;       ///< Hadamard factor
  double objective_value = 0.0;
  bool negated = false;  ///< solved on −H because trace(H) < 0
};

/// Optimal sample set around x0. Requires d to be a power of two, σ > 0 and
/// h > 0.
std::pair<SampleSet, CasgResult> casg_sample_set(const CurvatureSpec& spec, const Vec& x0);

namespace detail {

/// Solution in the coordinate system of `d` (any order, any trace sign):
/// rows of `s` follow the entries of `d`.
struct DiagonalSolution {
  Mat s;
  Vec sigma;
  Mat v;
  double objective = 0.0;
  bool negated = false;
};

DiagonalSolution solve_diagonal(const Vec& d, double sigma, double h);

}  // namespace detail

}  // namespace casg
