#pragma once

#include "traceforms/trace_engine.hpp"

namespace traceforms {

/// Splitting of the ground space into the form-orthogonal complement of
/// ker J (vectors u with K^T A u = 0; "harmonic" directions) and ker J
/// itself. The splitting exists exactly when K^T A K is nonsingular, which
/// direct_sum_ok records; the extension matrix then projects onto the
/// harmonic space along ker J while preserving the trace.
struct HarmonicDecomposition {
  KernelBasis kernel;
  Matrix harmonic_basis;    // N x k, columns span the harmonic space
  Matrix extension_matrix;  // I - K (K^T A K)^{-1} K^T A
  bool direct_sum_ok = false;
};

HarmonicDecomposition harmonic_decomposition(const QuadraticForm& form,
                                             const TraceMap& J);

/// Matrix of the form psi -> E[extension of psi] on aux coordinates.
/// Requires direct_sum_ok.
Matrix harmonic_form(const HarmonicDecomposition& H, const QuadraticForm& form,
                     const TraceMap& J);

struct SymmetryReport {
  double max_deviation = 0.0;
  bool pass = false;
};

/// Verifies E(Ext u, v) = E(u, Ext v) on sampled pairs.
SymmetryReport extension_symmetry_check(const HarmonicDecomposition& H,
                                        const QuadraticForm& form,
                                        const TraceMap& J, int samples,
                                        std::uint64_t seed);

/// The form restricted to ker J, expressed on kernel coordinates. LD_matrix
/// is the operator (K^T M K)^{-1} (K^T A K); surjective records whether
/// K^T A K is nonsingular.
struct DirichletPart {
  KernelBasis kernel;
  Matrix LD_matrix;
  bool surjective = false;
};

DirichletPart dirichlet_part(const QuadraticForm& form, const TraceMap& J);

/// Shift-independent harmonic representative with the same trace as u:
/// v = lambda * z + P_lambda u, where z in ker J solves the kernel-restricted
/// equation (K^T A K) z_K = K^T M P_lambda u. The result lies in the harmonic
/// space for every lambda > 0 and does not depend on lambda.
Vector harmonic_lift(const QuadraticForm& form, const TraceMap& J,
                     const DirichletPart& D, const Vector& u, double lambda);

/// Orthogonal projection onto the complement of ker J in the metric
/// E[u] + ||Ju||_aux^2. Coincides with the extension matrix; the identity is
/// asserted internally.
Matrix penalized_projection(const QuadraticForm& form, const TraceMap& J);

struct EllipticityResult {
  bool elliptic = false;
  double alpha_best = 0.0;
  double beta_best = 0.0;
  std::vector<std::pair<double, double>> grid;  // (beta, alpha(beta))
};

/// Scans a penalty grid for a coercivity certificate
///   E[u] + beta ||Ju||_aux^2 >= alpha (E[u] + ||u||^2),
/// where alpha(beta) is the smallest generalized eigenvalue of
/// A + beta J^T W J against A + M.
EllipticityResult ellipticity_scan(const QuadraticForm& form, const TraceMap& J,
                                   const std::vector<double>& beta_grid = {0.0, 0.5, 1.0,
                                                                           2.0, 4.0, 8.0});

}  // namespace traceforms
