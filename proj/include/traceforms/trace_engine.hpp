#pragma once

#include "traceforms/form_core.hpp"

namespace traceforms {

/// Orthonormal basis of ker J. For restriction maps these are exact
/// coordinate injections; for dense maps the basis comes from a full SVD.
struct KernelBasis {
  Matrix basis;  // N x (N-k), orthonormal columns, J * basis = 0
  bool exact_injection = false;

  Index codim() const { return basis.cols(); }
};

KernelBasis kernel_basis(const TraceMap& J);

/// Applies the E_lambda-orthogonal projection onto the complement of ker J:
/// P u = u - K (K^T B K)^{-1} K^T B u with B the shifted matrix. Afterwards
/// J(Pu) = Ju and K^T B Pu = 0.
Vector projection_apply(const ShiftedForm& shifted, const KernelBasis& kernel,
                        const Vector& u);

struct MinimizeResult {
  double value = 0.0;          // min of v^T B v subject to Jv = psi
  Vector minimizer;            // attaining v
  double constraint_residual = 0.0;
};

/// Solves the equality-constrained quadratic program
///   min v^T (A + lambda M) v   s.t.  J v = psi
/// through the bordered saddle-point system (Bunch-Kaufman factorization).
MinimizeResult dirichlet_minimize(const ShiftedForm& shifted, const TraceMap& J,
                                  const Vector& psi);

enum class TracePath { schur, kkt, adjoint };

const char* trace_path_name(TracePath path);
TracePath parse_trace_path(const std::string& name);

/// The reduced form on the auxiliary space at a fixed shift lambda > 0:
/// psi^T T psi is the minimum shifted energy over all extensions with trace
/// psi. operator_matrix is the W-self-adjoint operator W^{-1} T.
struct TraceForm {
  double lambda = 0.0;
  Matrix T;
  Matrix operator_matrix;
  TracePath path = TracePath::kkt;
  std::map<std::string, double> residuals;
};

/// Computes the trace form by one of three algebraically equivalent routes:
///   schur    Schur complement of A + lambda M onto the kept coordinates
///            (restriction maps only),
///   kkt      columnwise saddle-point solves against the aux basis,
///   adjoint  (J B^{-1} J^T W)^{-1} through the adjoint of the trace map.
TraceForm trace_form(const QuadraticForm& form, const TraceMap& J,
                     double lambda, TracePath path);

/// schur for restriction maps, adjoint otherwise.
TracePath auto_trace_path(const TraceMap& J);

/// (H + alpha I)^{-1} for the W-self-adjoint positive operator H.
Matrix resolvent(const Matrix& operator_matrix, double alpha);

struct TraceLimitStep {
  double lambda = 0.0;
  Matrix T;
  double decrement = 0.0;  // ||T - previous T||_F (0 at the first step)
};

struct TraceLimitResult {
  Matrix T0;               // last computed iterate along the schedule
  Matrix operator_matrix;  // W^{-1} T0
  std::vector<TraceLimitStep> schedule;
  bool converged = false;

  // Exact zero-shift reduction (generalized Schur complement), available
  // whenever A restricted to ker J is nonsingular; cross-checked against T0.
  bool exact_available = false;
  Matrix T0_exact;
  double exact_gap = 0.0;
};

/// Geometric shift schedule start * ratio^j for j = 0..count.
std::vector<double> geometric_schedule(double start = 1.0, double ratio = 0.5,
                                       int count = 40);

/// Monotone zero-shift limit of the trace forms along a strictly decreasing
/// schedule. Convergence is declared on successive form-matrix differences;
/// the last iterate is always returned, flagged converged or not.
TraceLimitResult trace_limit(const QuadraticForm& form, const TraceMap& J,
                             const std::vector<double>& schedule = geometric_schedule(),
                             double tol_limit = 1e-8);

struct ShiftConsistencyReport {
  double beta = 0.0;
  double deviation = 0.0;  // relative gap between the two constructions
  bool pass = false;
};

/// Checks that the trace form at shift beta equals the zero-shift limit of
/// the traces of the beta-shifted base form.
ShiftConsistencyReport shift_consistency_check(const QuadraticForm& form,
                                               const TraceMap& J, double beta);

}  // namespace traceforms
