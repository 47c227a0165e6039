#pragma once

// CSV tables written by the experiment drivers.

#include <iosfwd>
#include <vector>

#include "casg/harness/dfo.hpp"
#include "casg/harness/profile.hpp"
#include "casg/harness/sensitivity.hpp"

namespace casg::harness {

/// One row per trace point; iteration 0 carries the start value.
void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& records);
/// Inverse of write_runs_csv (error messages are not stored). Throws Io.
std::vector<RunRecord> read_runs_csv(std::istream& in);

void write_profile_csv(std::ostream& out, const std::vector<std::pair<double, std::vector<ProfileCurve>>>& curves);
void write_sensitivity_csv(std::ostream& out, const std::vector<SensitivityRow>& rows);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_toy_csv(std::ostream& out, const std::vector<ToyRow>& rows);

}  // namespace casg::harness
