#include "casg/harness/profile.hpp"

#include <algorithm>
#include <map>

#include "casg/error.hpp"

namespace casg::harness {

double ProfileCurve::at(double budget) const {
  const auto it = std::upper_bound(budgets.begin(), budgets.end(), budget);
  if (it == budgets.begin()) return 0.0;
  return fractions[static_cast<std::size_t>(it - budgets.begin()) - 1];
}

double convergence_budget(const RunRecord& run, double f_low, double tau) {
  const double target = (1.0 - tau) * (run.initial_value - f_low);
  for (const auto& p : run.trace) {
    if (run.initial_value - p.value >= target) {
      return static_cast<double>(p.evaluations) / run.dim;
    }
  }
  return kInfinity;
}

std::vector<std::pair<std::string, double>> lowest_mean_values(const std::vector<RunRecord>& records) {
  std::map<std::string, std::map<std::string, std::pair<double, int>>> sums;
  for (const auto& r : records) {
    auto& s = sums[r.problem][r.method];
    s.first += r.final_value();
    s.second += 1;
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [problem, methods] : sums) {
    double low = kInfinity;
    for (const auto& [m, s] : methods) low = std::min(low, s.first / s.second);
    out.emplace_back(problem, low);
  }
  return out;
}

std::vector<ProfileCurve> data_profile(const std::vector<RunRecord>& records, double tau) {
  if (records.empty()) throw Error(ErrorKind::EmptyRecordSet, "no run records");
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorKind::InvalidArgument, "tau must lie in (0, 1)");
  std::map<std::string, double> f_low;
  for (const auto& [p, v] : lowest_mean_values(records)) f_low[p] = v;

  std::map<std::string, std::vector<double>> hits;
  for (const auto& r : records) hits[r.method].push_back(convergence_budget(r, f_low.at(r.problem), tau));

  std::vector<ProfileCurve> curves;
  for (auto& [method, b] : hits) {
    std::sort(b.begin(), b.end());
    ProfileCurve c;
    c.method = method;
    c.runs = static_cast<int>(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (b[i] == kInfinity) break;
      const double frac = static_cast<double>(i + 1) / c.runs;
      if (!c.budgets.empty() && c.budgets.back() == b[i]) {
        c.fractions.back() = frac;
      } else {
        c.budgets.push_back(b[i]);
        c.fractions.push_back(frac);
      }
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

}  // namespace casg::harness
