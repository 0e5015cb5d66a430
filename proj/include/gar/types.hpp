#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace gar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Error identities thrown by the library. Solver non-convergence is NOT an
/// error: solvers return their best iterate with converged=false in the trace.
enum class ErrorCode {
  IsolatedNode,
  DimensionMismatch,
  SingularPair,
  NonPositiveEigen,
  NonFiniteObjective,
  SchurSingular,
  DegenerateCovariance,
  NonPD,
  AllCellsFailed,
  ResampleBudgetExceeded,
  ZeroVariance,
  InvalidArgument,
  IoError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* version() { return "0.1.0"; }

/// Runs fn(0..n-1) on up to `threads` workers. Tasks must be independent and
/// write only to their own output slots, so results do not depend on the
/// thread count. threads <= 1 runs inline.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace gar
