#include "casg/error.hpp"

namespace casg {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SingularDifferenceMatrix: return "SingularDifferenceMatrix";
    case ErrorKind::InvalidActiveSet: return "InvalidActiveSet";
    case ErrorKind::NegativeTrace: return "NegativeTrace";
    case ErrorKind::NoFeasibleCandidate: return "NoFeasibleCandidate";
    case ErrorKind::NotPowerOfTwo: return "NotPowerOfTwo";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::EmptyRecordSet: return "EmptyRecordSet";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace casg
