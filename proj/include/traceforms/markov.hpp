#pragma once

#include "traceforms/trace_engine.hpp"

namespace traceforms {

/// Componentwise clamp to [0,1] (the unit contraction).
Vector unit_contraction(const Vector& u);

/// M-matrix-type structural test: off-diagonal entries nonpositive and row
/// sums nonnegative, both within scale-relative slack.
struct StructuralReport {
  double offdiag_max = 0.0;
  double rowsum_min = 0.0;
  bool pass = false;
};

StructuralReport structural_check(const Matrix& A);

struct ContractionReport {
  StructuralReport structural;
  double worst_violation = 0.0;  // max of E[clamp(u)] - E[u] over samples
  bool sampling_pass = false;
  bool pass = false;
};

/// Tests whether a form with diagonal mass behaves like a Dirichlet form:
/// structurally (M-matrix pattern) and by sampling the unit contraction on
/// heavy-tailed vectors plus targeted two-coordinate probes.
ContractionReport dirichlet_form_check(const Matrix& A, const Matrix& mass,
                                       int samples, std::uint64_t seed);

struct MarkovReport {
  std::vector<double> alpha_list;
  double max_box_violation = 0.0;
  StructuralReport structural;
  bool pass = false;
};

/// Markov test for the operator associated with a reduced form T and a
/// diagonal weight W: alpha (W^{-1}T + alpha)^{-1} must map [0,1]^k into
/// itself. Samples interior points and box vertices.
MarkovReport markov_resolvent_check(const Matrix& T, const Matrix& W,
                                    const std::vector<double>& alphas, int samples,
                                    std::uint64_t seed);

/// Ground-space representative of an auxiliary density psi at unit shift:
/// the unique U with (A + M) U = J^T W psi, so that the shifted form pairs
/// U against any v exactly as psi pairs against Jv in the auxiliary space.
Vector one_potential(const QuadraticForm& form, const TraceMap& J, const Vector& psi);

struct PotentialIdentityReport {
  double max_residual = 0.0;
  bool pass = false;
};

/// Verifies T_1^{-1} W psi = J (A+M)^{-1} J^T W psi on sampled psi, with the
/// two sides computed through independent factorizations.
PotentialIdentityReport potential_identity_check(const QuadraticForm& form,
                                                 const TraceMap& J, int samples,
                                                 std::uint64_t seed);

}  // namespace traceforms
