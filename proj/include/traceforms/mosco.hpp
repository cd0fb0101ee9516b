#pragma once

#include "traceforms/trace_engine.hpp"

namespace traceforms {

/// A sequence of comparable forms on one ground space: the terms A_n, the
/// declared limit, a reference form anchoring the two-sided comparability
/// bound, and the trace map shared by all of them.
struct FormSequence {
  std::vector<QuadraticForm> terms;
  std::vector<double> n_values;  // labels, default 1..len
  QuadraticForm limit;
  QuadraticForm reference;
  TraceMap map;
};

FormSequence make_form_sequence(const Matrix& mass, const std::vector<Matrix>& terms,
                                const Matrix& limit, const Matrix& reference,
                                const TraceMap& map,
                                std::vector<double> n_values = {});

/// Smallest two-sided constant c with c^{-1} E_ref <= E_n <= c E_ref over
/// all terms and the limit. Infinite when the kernels mismatch or a ratio
/// degenerates; `reason` says which.
struct ComparabilityReport {
  double c = 1.0;
  bool infinite = false;
  std::vector<double> per_term;
  std::string reason;
};

ComparabilityReport comparability_constant(const FormSequence& seq);

/// Operator norm of the trace map from the unit-shifted form metric into the
/// auxiliary space: sqrt of the top generalized eigenvalue of J^T W J
/// against A + M.
double trace_map_norm(const QuadraticForm& form, const TraceMap& J);

/// Compatibility of traced resolvents with the declared limit:
/// residual_n = max_u || J ((H_n+1)^{-1} - (H_inf+1)^{-1}) u ||_W, plus the
/// sufficient-condition gaps |E_n[v] - E_inf[v]| on v in the limit resolvent
/// range, and a log-log decay slope of the residuals.
struct ResolventTraceReport {
  std::vector<double> residuals;
  std::vector<double> energy_gaps;
  double slope = 0.0;
  bool slope_valid = false;
};

ResolventTraceReport resolvent_trace_residuals(const FormSequence& seq,
                                               int test_vectors, std::uint64_t seed);

/// Distance between two forms sharing the mass matrix M: the M-operator norm
/// of the gap between the unit resolvents of the associated operators. Zero
/// exactly when the forms coincide.
double mosco_distance(const Matrix& A1, const Matrix& A2, const Matrix& M);

struct MoscoReport {
  std::vector<double> distances;    // per term, to the limit trace at lambda
  std::vector<double> q_form_gaps;  // bounded-form route, W-operator norm
  std::vector<std::pair<double, double>> diagonal;  // (lambda_j, n_j) when used
  std::vector<std::string> warnings;
  double slope = 0.0;
  bool slope_valid = false;
  double final_distance = 0.0;
  bool pass = false;
};

/// Trace-convergence experiment at a fixed shift: reduced forms of every
/// term against the reduced form of the limit, measured by resolvent gaps on
/// the auxiliary space, alongside the bounded forms W J (A_n + lambda M)^{-1}
/// J^T W. Assumption failures are reported as warnings, not errors.
MoscoReport trace_convergence_run(const FormSequence& seq, double lambda,
                                  double tol_run = 1e-3);

/// Diagonal selection: for each shift lambda_j picks the first unused term
/// whose reduced form is eps_j-close to the limit's reduced form at the same
/// shift, then reports the distances of the selected pairs to the zero-shift
/// limit trace. Throws ScheduleExhausted when no term qualifies.
struct DiagonalResult {
  std::vector<std::pair<double, Index>> pairs;  // (lambda_j, term index)
  std::vector<double> distances_to_limit;
};

DiagonalResult diagonal_select(const FormSequence& seq,
                               const std::vector<double>& lambdas,
                               const std::vector<double>& epsilons);

/// FEM realization of the scaled interval family with endpoint charges as a
/// form sequence. The declared limit is either the zero form (the true weak
/// limit of the family) or the entrywise limit of the matrices.
enum class CounterexampleLimit { zero_form, entrywise };

FormSequence counterexample_sequence(const std::vector<double>& n_values, Index N,
                                     CounterexampleLimit declared);

}  // namespace traceforms
