// Common numeric types and the error type shared by every mrw module.
#ifndef MRW_CORE_HPP
#define MRW_CORE_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <string_view>

namespace mrw {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Tolerance for row sums, distribution sums and stationarity.
inline constexpr double kStochasticTolerance = 1e-12;

enum class ErrorKind {
  NonSquare,
  NegativeEntry,
  RowSumViolation,
  NotIrreducible,
  NotStationary,
  ZeroMass,
  DimensionMismatch,
  IndexOutOfRange,
  AlphaOutOfRange,
  ProbabilitySumViolation,
  EnumerationTooLarge,
  SingularMomentSystem,
  ProductUnderflowUnrecoverable,
  EmptySample,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonSquare: return "NonSquare";
    case ErrorKind::NegativeEntry: return "NegativeEntry";
    case ErrorKind::RowSumViolation: return "RowSumViolation";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::NotStationary: return "NotStationary";
    case ErrorKind::ZeroMass: return "ZeroMass";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorKind::ProbabilitySumViolation: return "ProbabilitySumViolation";
    case ErrorKind::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorKind::SingularMomentSystem: return "SingularMomentSystem";
    case ErrorKind::ProductUnderflowUnrecoverable: return "ProductUnderflowUnrecoverable";
    case ErrorKind::EmptySample: return "EmptySample";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Domain error raised by the numeric modules. The kind is stable and
// machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace detail
}  // namespace mrw

#endif  // MRW_CORE_HPP
