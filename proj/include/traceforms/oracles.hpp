#pragma once

#include "traceforms/trace_engine.hpp"

namespace traceforms {

/// Closed-form coefficients of the reduced form of the line Dirichlet energy
/// on the integer lattice at shift lambda:
///   c_off * sum |psi(n+1)-psi(n)|^2 + c_diag * sum |psi(n)|^2
/// with c_off = sqrt(l)/sinh(sqrt(l)) and c_diag = 2 sqrt(l) tanh(sqrt(l)/2).
struct ChainTraceCoefficients {
  double lambda = 0.0;
  double c_off = 0.0;
  double c_diag = 0.0;
};

ChainTraceCoefficients chain_coefficients(double lambda);

/// Evaluates the lattice form above on a finitely supported sequence
/// (entries of psi are the values on consecutive integers, zero outside).
double chain_trace_value(double lambda, const Vector& psi);

/// Per-mode symbol of the half-space Dirichlet-to-Neumann reduction:
/// sqrt(xi^2 + lambda); at lambda = 0 this is the symbol of the half
/// Laplacian.
double halfspace_symbol(double xi, double lambda);

/// Closed-form reduced-form value for the scaled interval family
///   (1/n) * Dirichlet energy + endpoint charges,
/// traced onto the endpoints, evaluated at boundary data (a, b). lambda = 0
/// selects the zero-shift formula (1/n)(b-a)^2 + a^2 + b^2.
double counterexample_value(double n, double lambda, double a, double b);

/// P1 finite elements on a uniform mesh of [x0, x1] with N nodes: stiffness
/// (Neumann, row sums zero) and the consistent tridiagonal mass matrix.
struct FemInstance {
  Index mesh_size = 0;  // node count
  double x0 = 0.0;
  double x1 = 0.0;
  double h = 0.0;
  Matrix A;  // stiffness
  Matrix M;  // mass
  Vector node_coords;
};

FemInstance fem_interval(Index N, double x0, double x1);

/// P1 matrices are valid by construction; this wraps them without the
/// O(N^3) validation pass.
QuadraticForm fem_form(const FemInstance& fem);

/// Discretizes the line energy on [-L, L], traces onto the integer nodes and
/// compares the interior entries of the computed reduced form against the
/// closed-form coefficients. `weights` scales the auxiliary measure (defaults
/// to ones) and must never influence the reduced form itself.
struct ChainDemoResult {
  double lambda = 0.0;
  Matrix T;                  // computed reduced form on the integer nodes
  ChainTraceCoefficients oracle;
  double offdiag_gap = 0.0;  // relative, interior window
  double diag_gap = 0.0;
  double spurious_fill = 0.0;  // largest |entry| beyond the nearest neighbor
  double rel_gap = 0.0;
  bool pass = false;
};

ChainDemoResult fem_chain_demo(int L, int nodes_per_unit, double lambda,
                               const Vector& weights = Vector());

/// Zero-shift limit of the chain demo; the interior window must reproduce
/// the unweighted nearest-neighbor difference form.
struct ChainLimitDemoResult {
  Matrix T0;
  double rel_gap = 0.0;
  bool converged = false;
  bool pass = false;
};

ChainLimitDemoResult fem_chain_limit_demo(int L, int nodes_per_unit,
                                          const Vector& weights = Vector());

/// Minimum of int_0^T (w'^2 + (xi^2+lambda) w^2) over P1 functions with
/// w(0) = 1 and a natural condition at T; converges to the half-space symbol
/// as T and N grow.
double fem_halfstrip_mode(double xi, double lambda, double t_domain, Index N);

/// FEM realization of the scaled interval family with endpoint charges;
/// feeding it to the trace engine reproduces counterexample_value.
struct CounterexampleInstance {
  QuadraticForm form;
  TraceMap map;
  double n = 1.0;
};

CounterexampleInstance fem_counterexample(double n, Index N);

/// Five-point Laplacian on an n_outer x n_outer grid with an n_inner x
/// n_inner centered box kept as the auxiliary space. The zero-shift limit
/// operator must act as the untouched five-point stencil on box nodes not
/// adjacent to eliminated nodes; boundary-ring deviations are reported, and
/// the operator must commute with the quarter-turn of the geometry.
struct GridDemoResult {
  Matrix T0;
  Index interior_rows = 0;
  double interior_row_gap = 0.0;
  double interface_row_max_dev = 0.0;
  double rotation_gap = 0.0;
  bool pass = false;
};

GridDemoResult grid2d_nested(Index n_outer, Index n_inner);

}  // namespace traceforms
