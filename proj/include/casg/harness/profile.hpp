#pragma once

// Data profiles over optimization runs.

#include <string>
#include <vector>

#include "casg/harness/dfo.hpp"

namespace casg::harness {

/// Step function: fraction of a method's runs converged within a budget
/// (simplex gradients). `budgets` are the increasing breakpoints; the value
/// is fractions[i] on [budgets[i], budgets[i+1]) and 0 before budgets[0].
struct ProfileCurve {
  std::string method;
  std::vector<double> budgets;
  std::vector<double> fractions;
  int runs = 0;

  double at(double budget) const;
};

/// Budget (simplex gradients) at which a run first satisfies
/// f(x0) − f_best ≥ (1 − τ)(f(x0) − f_L); +inf if never.
double convergence_budget(const RunRecord& run, double f_low, double tau);

/// f_L per problem: the lowest mean final value over methods.
std::vector<std::pair<std::string, double>> lowest_mean_values(const std::vector<RunRecord>& records);

/// One curve per method (sorted by name). Throws EmptyRecordSet for no
/// records and InvalidArgument unless 0 < τ < 1.
std::vector<ProfileCurve> data_profile(const std::vector<RunRecord>& records, double tau);

}  // namespace casg::harness
