#pragma once

#include "traceforms/common.hpp"

#include <optional>

namespace traceforms {

/// A positive quadratic form E[u] = u^T A u on a ground space carrying the
/// inner product <u,v> = u^T M v. A is symmetric positive semidefinite, M
/// symmetric positive definite; both are checked (and symmetrized within
/// tolerance) by validate_form.
struct QuadraticForm {
  Index dim = 0;
  Matrix form_matrix;  // A
  Matrix mass_matrix;  // M

  // validation record
  double asymmetry_a = 0.0;
  double asymmetry_m = 0.0;
  double min_pivot_a = 0.0;  // smallest eigenvalue (small dims) or LDLT pivot
};

QuadraticForm validate_form(const Matrix& A, const Matrix& M,
                            const Tolerances& tol = {});

/// E_lambda[u] = E[u] + lambda * ||u||^2, assembled as A + lambda*M.
struct ShiftedForm {
  QuadraticForm base;
  double lambda = 0.0;
  Matrix shifted_matrix;  // A + lambda*M
};

ShiftedForm shift(const QuadraticForm& form, double lambda);

/// Auxiliary space with inner product <p,q>_aux = p^T W q, W symmetric
/// positive definite (diagonal in the weighted-measure use cases).
struct AuxSpace {
  Index dim = 0;
  Matrix weight_matrix;  // W
};

AuxSpace validate_aux_space(const Matrix& W, const Tolerances& tol = {});

/// Surjective linear map J from the ground space onto the auxiliary space.
/// Stored either as a dense k x N matrix or as a coordinate restriction
/// (index list), which keeps kernel bases and Schur reductions exact.
class TraceMap {
 public:
  bool is_restriction() const { return indices_.has_value(); }
  Index aux_dim() const { return aux_.dim; }
  Index ground_dim() const { return ground_dim_; }
  const AuxSpace& aux() const { return aux_; }

  /// Restriction index list (aux coordinate j reads ground coordinate
  /// indices()[j]). Only valid when is_restriction().
  const std::vector<Index>& indices() const;

  /// Dense J (materialized on demand for restriction maps).
  Matrix matrix() const;

  /// J v, using the coordinate-gather fast path for restrictions.
  Vector apply(const Vector& v) const;

  friend TraceMap validate_trace_map(const Matrix& J, const AuxSpace& aux,
                                     const QuadraticForm& form,
                                     const Tolerances& tol);
  friend TraceMap validate_trace_map(const std::vector<Index>& restriction,
                                     const AuxSpace& aux,
                                     const QuadraticForm& form,
                                     const Tolerances& tol);

 private:
  std::optional<Matrix> dense_;
  std::optional<std::vector<Index>> indices_;
  AuxSpace aux_;
  Index ground_dim_ = 0;
};

/// Validates a dense trace map: shape, full row rank (rank k realizes the
/// dense-range requirement in finite dimensions).
TraceMap validate_trace_map(const Matrix& J, const AuxSpace& aux,
                            const QuadraticForm& form,
                            const Tolerances& tol = {});

/// Validates a coordinate-restriction trace map: indices distinct, in range,
/// and matching the auxiliary dimension.
TraceMap validate_trace_map(const std::vector<Index>& restriction,
                            const AuxSpace& aux, const QuadraticForm& form,
                            const Tolerances& tol = {});

}  // namespace traceforms
