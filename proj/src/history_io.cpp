#include "casg/history_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "casg/error.hpp"

namespace casg {

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, std::size_t line_no) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw Error(ErrorKind::Io, "line " + std::to_string(line_no) + ": bad number '" + t + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_history_csv(std::ostream& out, const EvaluationHistory& history) {
  const int d = history.dim();
  out << "step";
  for (int i = 1; i <= d; ++i) out << ",x_" << i;
  out << ",y\n";
  for (const auto& r : history.records()) {
    out << r.step;
    for (int i = 0; i < d; ++i) out << ',' << format_double(r.x(i));
    out << ',' << format_double(r.y) << '\n';
  }
}

EvaluationHistory read_history_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw Error(ErrorKind::Io, "history file is empty");
  ++line_no;
  const auto header = split_row(trim(line));
  const int cols = static_cast<int>(header.size());
  if (cols < 3 || trim(header.front()) != "step" || trim(header.back()) != "y") {
    throw Error(ErrorKind::Io, "history header must be step,x_1,...,x_d,y");
  }
  const int d = cols - 2;
  for (int i = 1; i <= d; ++i) {
    if (trim(header[i]) != "x_" + std::to_string(i)) {
      throw Error(ErrorKind::Io, "unexpected header column '" + trim(header[i]) + "'");
    }
  }
  EvaluationHistory history;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto row = split_row(trim(line));
    if (static_cast<int>(row.size()) != cols) {
      throw Error(ErrorKind::Io, "line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(cols) + " columns");
    }
    const double step = parse_double(row[0], line_no);
    if (!(step >= 1.0) || step != std::floor(step) || step > 9.0e15) {
      throw Error(ErrorKind::Io, "line " + std::to_string(line_no) + ": bad step");
    }
    Vec x(d);
    for (int i = 0; i < d; ++i) x(i) = parse_double(row[i + 1], line_no);
    const double y = parse_double(row.back(), line_no);
    try {
      history.append(x, y, static_cast<std::uint64_t>(step));
    } catch (const Error& e) {
      throw Error(ErrorKind::Io, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return history;
}

void save_history_csv(const std::string& path, const EvaluationHistory& history) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  write_history_csv(out, history);
  if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

EvaluationHistory load_history_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  try {
    return read_history_csv(in);
  } catch (const Error& e) {
    throw e.with_context(path);
  }
}

}  // namespace casg
