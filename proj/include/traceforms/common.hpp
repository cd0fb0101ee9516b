#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace traceforms {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class ErrorCode {
  NotSymmetric,
  NotPSD,
  MassNotPD,
  RankDeficient,
  SizeLimit,
  SingularKernelBlock,
  SaddleSingular,
  PathUnavailable,
  NoDirectSum,
  NotSurjective,
  NonDiagonalMass,
  NonDiagonalWeight,
  NonPositiveLambda,
  GeometryInvalid,
  ScheduleExhausted,
  Singular,
  InternalCheckFailed,
  ParseError,
  ValidationError,
  IoError,
};

const char* error_code_name(ErrorCode code);

/// All library failures are reported through this exception; `code()` gives
/// the machine-readable reason, `what()` the human-readable context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

/// Scale-relative tolerances used throughout validation and the numerical
/// kernels. The defaults survive FEM assembly at varying mesh sizes, where
/// matrix norms range over several orders of magnitude.
struct Tolerances {
  double symmetry = 1e-10;   // relative asymmetry accepted before symmetrizing
  double psd_slack = 1e-8;   // x ||A||, slack for the smallest eigenvalue of A
  double rank = 1e-10;       // x ||J||, rank-revealing threshold
  double pd_floor = 1e-12;   // x ||M||, smallest admissible mass eigenvalue
};

inline Matrix symmetric_part(const Matrix& X) { return 0.5 * (X + X.transpose()); }

/// Relative asymmetry ||X - X^T|| / ||X|| in the max norm (0 for X = 0).
double relative_asymmetry(const Matrix& X);

/// Spectral norm of a symmetric matrix (exact, via eigensolve).
double spectral_norm_sym(const Matrix& S);

/// Relative gap ||X - Y||_F / max(||Y||_F, floor).
double relative_gap(const Matrix& X, const Matrix& Y);

/// Number of worker threads: TRACEFORMS_THREADS if set (0 = auto), else auto.
int thread_count();

/// Runs fn(i) for i in [0, n). Deterministic with respect to thread count:
/// every index is computed independently; callers own any ordered merge.
void parallel_for(Index n, const std::function<void(Index)>& fn);

/// Stateless mixing of (seed, index) into an independent RNG stream seed, so
/// sampling loops are reproducible under any parallel schedule.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace traceforms
