#pragma once

#include <stdexcept>
#include <string>

namespace casg {

enum class ErrorKind {
  SingularDifferenceMatrix,
  InvalidActiveSet,
  NegativeTrace,
  NoFeasibleCandidate,
  NotPowerOfTwo,
  NonFiniteInput,
  InvalidArgument,
  DegenerateGeometry,
  NonFiniteState,
  EmptyRecordSet,
  Config,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Same kind, message prefixed with `context: `.
  Error with_context(const std::string& context) const {
    return Error(kind_, context + ": " + what());
  }

 private:
  ErrorKind kind_;
};

}  // namespace casg
