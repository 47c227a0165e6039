#pragma once

// JSON experiment configuration. Unknown keys are rejected; every failure is
// an Error of kind Config naming the offending key.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "casg/harness/dfo.hpp"
#include "casg/harness/sensitivity.hpp"

namespace casg::harness {

using Json = nlohmann::json;

/// Throws Io when unreadable, Config when not valid JSON.
Json load_json(const std::string& path);

/// Directory part of `path` ("." when none).
std::string parent_dir(const std::string& path);

struct ToyJob {
  std::vector<double> ks;
  double sigma = 0.1;
  double h = 1.0;
};

/// Either a sampled experiment on a problem or the two-dimensional toy sweep.
struct SensitivityJob {
  std::optional<SensitivityConfig> experiment;
  std::optional<ToyJob> toy;
};

struct ProfileJob {
  std::string runs_csv;
  std::vector<double> taus{1e-1, 1e-5};
  bool select_best_h = true;
};

/// `"ackley_8"` or `{"name": ..., "dim": ..., "k": ..., "coefficients": {...},
/// "coefficients_file": path}`; relative paths resolve against `base_dir`.
Problem parse_problem(const Json& spec, const std::string& base_dir);

/// Coefficients from `{"coefficients": {"alpha1": ..., ...}}`; all eleven
/// names required.
ColonCoefficients parse_colon(const Json& j);

SensitivityJob parse_sensitivity(const Json& j, const std::string& base_dir);
DfoConfig parse_dfo(const Json& j, const std::string& base_dir);
ProfileJob parse_profile(const Json& j, const std::string& base_dir);

}  // namespace casg::harness
