#pragma once

#include <iosfwd>
#include <string>

#include "casg/simplex.hpp"

namespace casg {

/// CSV with header `step,x_1,...,x_d,y`; numbers printed with 17 significant
/// digits so a write/read cycle reproduces every double exactly.
void write_history_csv(std::ostream& out, const EvaluationHistory& history);
EvaluationHistory read_history_csv(std::istream& in);

void save_history_csv(const std::string& path, const EvaluationHistory& history);
EvaluationHistory load_history_csv(const std::string& path);

/// "%.17g".
std::string format_double(double v);

}  // namespace casg
