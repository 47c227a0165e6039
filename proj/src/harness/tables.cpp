#include "casg/harness/tables.hpp"

#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>

#include "casg/error.hpp"
#include "casg/history_io.hpp"

namespace casg::harness {

namespace {

constexpr const char* kRunsHeader =
    "problem,method,h,sigma,run,seed,dim,iteration,evaluations,budget,best_value,initial_value,"
    "gradient_estimates,gradient_evaluations,line_search_evaluations,init_evaluations,status,stop_reason";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw Error(ErrorKind::Io, "bad number '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw Error(ErrorKind::Io, "bad integer '" + s + "'");
  return v;
}

}  // namespace

void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << kRunsHeader << '\n';
  for (const auto& r : records) {
    auto row = [&](std::size_t it, std::uint64_t evals, double best) {
      out << r.problem << ',' << r.method << ',' << format_double(r.h) << ',' << format_double(r.sigma) << ','
          << r.run << ',' << r.seed << ',' << r.dim << ',' << it << ',' << evals << ','
          << format_double(static_cast<double>(evals) / r.dim) << ',' << format_double(best) << ','
          << format_double(r.initial_value) << ',' << r.gradient_estimates << ',' << r.gradient_evaluations
          << ',' << r.line_search_evaluations << ',' << r.init_evaluations << ','
          << (r.failed ? "failed" : "ok") << ',' << r.stop_reason << '\n';
    };
    row(0, 0, r.initial_value);
    for (std::size_t i = 0; i < r.trace.size(); ++i) row(i + 1, r.trace[i].evaluations, r.trace[i].value);
  }
}

std::vector<RunRecord> read_runs_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRunsHeader) throw Error(ErrorKind::Io, "unexpected runs header");
  std::vector<RunRecord> out;
  std::map<std::tuple<std::string, std::string, std::string, int>, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 18) throw Error(ErrorKind::Io, "runs line " + std::to_string(line_no) + ": expected 18 columns");
    try {
      const auto key = std::make_tuple(c[0], c[1], c[2], static_cast<int>(to_u64(c[4])));
      auto it = index.find(key);
      if (it == index.end()) {
        RunRecord r;
        r.problem = c[0];
        r.method = c[1];
        r.h = to_double(c[2]);
        r.sigma = to_double(c[3]);
        r.run = static_cast<int>(to_u64(c[4]));
        r.seed = to_u64(c[5]);
        r.dim = static_cast<int>(to_u64(c[6]));
        r.initial_value = to_double(c[11]);
        r.gradient_estimates = static_cast<int>(to_u64(c[12]));
        r.gradient_evaluations = to_u64(c[13]);
        r.line_search_evaluations = to_u64(c[14]);
        r.init_evaluations = to_u64(c[15]);
        r.failed = c[16] == "failed";
        r.stop_reason = c[17];
        if (r.dim < 1) throw Error(ErrorKind::Io, "dim must be positive");
        it = index.emplace(key, out.size()).first;
        out.push_back(std::move(r));
      }
      if (to_u64(c[7]) > 0) out[it->second].trace.push_back(TracePoint{to_u64(c[8]), to_double(c[10])});
    } catch (const Error& e) {
      throw Error(ErrorKind::Io, "runs line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_profile_csv(std::ostream& out,
                       const std::vector<std::pair<double, std::vector<ProfileCurve>>>& curves) {
  out << "tau,method,budget,fraction\n";
  for (const auto& [tau, cs] : curves) {
    for (const auto& c : cs) {
      for (std::size_t i = 0; i < c.budgets.size(); ++i) {
        out << format_double(tau) << ',' << c.method << ',' << format_double(c.budgets[i]) << ','
            << format_double(c.fractions[i]) << '\n';
      }
    }
  }
}

void write_sensitivity_csv(std::ostream& out, const std::vector<SensitivityRow>& rows) {
  out << "point,method,h,mse,status\n";
  for (const auto& r : rows) {
    out << r.point << ',' << r.method << ',' << format_double(r.h) << ','
        << (r.failed ? std::string("nan") : format_double(r.mse)) << ',' << (r.failed ? "failed" : "ok") << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "model_size,method,median,q25,q75\n";
  for (const auto& r : rows) {
    out << r.model_size << ',' << r.method << ',' << format_double(r.median) << ',' << format_double(r.q25)
        << ',' << format_double(r.q75) << '\n';
  }
}

void write_toy_csv(std::ostream& out, const std::vector<ToyRow>& rows) {
  out << "k,casg_objective,fd_objective,casg_approximation_error,cd_noise_error\n";
  for (const auto& r : rows) {
    out << format_double(r.k) << ',' << format_double(r.casg_objective) << ',' << format_double(r.fd_objective)
        << ',' << format_double(r.casg_approximation_error) << ',' << format_double(r.cd_noise_error) << '\n';
  }
}

}  // namespace casg::harness
