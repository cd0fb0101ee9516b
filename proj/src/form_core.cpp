#include "traceforms/form_core.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace traceforms {

namespace {

// Smallest-eigenvalue probe. Exact eigensolve up to moderate sizes; above
// that an LDLT pivot scan, whose inertia signal is what the PSD test needs.
double min_eigenvalue_estimate(const Matrix& S) {
  constexpr Index kExactLimit = 256;
  if (S.rows() == 0) return 0.0;
  if (S.rows() <= kExactLimit) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  Eigen::LDLT<Matrix> ldlt(S);
  return ldlt.vectorD().minCoeff();
}

double matrix_scale(const Matrix& S) {
  const double m = S.size() == 0 ? 0.0 : S.cwiseAbs().maxCoeff();
  return std::max(m, 1.0e-300);
}

}  // namespace

QuadraticForm validate_form(const Matrix& A, const Matrix& M,
                            const Tolerances& tol) {
  if (A.rows() != A.cols() || M.rows() != M.cols() || A.rows() != M.rows()) {
    fail(ErrorCode::ValidationError, "form and mass matrices must be square and of equal size");
  }
  if (A.rows() == 0) {
    fail(ErrorCode::ValidationError, "empty ground space");
  }

  QuadraticForm out;
  out.dim = A.rows();
  out.asymmetry_a = relative_asymmetry(A);
  out.asymmetry_m = relative_asymmetry(M);
  if (out.asymmetry_a > tol.symmetry) {
    std::ostringstream os;
    os << "form matrix asymmetry " << out.asymmetry_a << " exceeds " << tol.symmetry;
    fail(ErrorCode::NotSymmetric, os.str());
  }
  if (out.asymmetry_m > tol.symmetry) {
    std::ostringstream os;
    os << "mass matrix asymmetry " << out.asymmetry_m << " exceeds " << tol.symmetry;
    fail(ErrorCode::NotSymmetric, os.str());
  }
  out.form_matrix = symmetric_part(A);
  out.mass_matrix = symmetric_part(M);

  out.min_pivot_a = min_eigenvalue_estimate(out.form_matrix);
  const double a_scale = matrix_scale(out.form_matrix);
  if (out.min_pivot_a < -tol.psd_slack * a_scale) {
    std::ostringstream os;
    os << "form matrix has eigenvalue " << out.min_pivot_a
       << " below -" << tol.psd_slack * a_scale;
    fail(ErrorCode::NotPSD, os.str());
  }

  const double m_min = min_eigenvalue_estimate(out.mass_matrix);
  const double m_scale = matrix_scale(out.mass_matrix);
  if (m_min <= tol.pd_floor * m_scale) {
    std::ostringstream os;
    os << "mass matrix smallest eigenvalue " << m_min << " not positive definite";
    fail(ErrorCode::MassNotPD, os.str());
  }
  return out;
}

ShiftedForm shift(const QuadraticForm& form, double lambda) {
  if (lambda < 0.0) {
    fail(ErrorCode::ValidationError, "shift requires lambda >= 0");
  }
  ShiftedForm out;
  out.base = form;
  out.lambda = lambda;
  if (lambda == 0.0) {
    out.shifted_matrix = form.form_matrix;
  } else {
    out.shifted_matrix = form.form_matrix + lambda * form.mass_matrix;
  }
  return out;
}

AuxSpace validate_aux_space(const Matrix& W, const Tolerances& tol) {
  if (W.rows() != W.cols() || W.rows() == 0) {
    fail(ErrorCode::ValidationError, "weight matrix must be square and nonempty");
  }
  if (relative_asymmetry(W) > tol.symmetry) {
    fail(ErrorCode::NotSymmetric, "weight matrix not symmetric");
  }
  AuxSpace out;
  out.dim = W.rows();
  out.weight_matrix = symmetric_part(W);
  const double w_min = min_eigenvalue_estimate(out.weight_matrix);
  if (w_min <= tol.pd_floor * matrix_scale(out.weight_matrix)) {
    fail(ErrorCode::MassNotPD, "weight matrix not positive definite");
  }
  return out;
}

const std::vector<Index>& TraceMap::indices() const {
  if (!indices_) {
    fail(ErrorCode::PathUnavailable, "trace map is not a coordinate restriction");
  }
  return *indices_;
}

Matrix TraceMap::matrix() const {
  if (dense_) return *dense_;
  Matrix J = Matrix::Zero(aux_.dim, ground_dim_);
  for (Index j = 0; j < aux_.dim; ++j) J(j, (*indices_)[j]) = 1.0;
  return J;
}

Vector TraceMap::apply(const Vector& v) const {
  if (v.size() != ground_dim_) {
    fail(ErrorCode::ValidationError, "vector length does not match ground dimension");
  }
  if (indices_) {
    Vector out(aux_.dim);
    for (Index j = 0; j < aux_.dim; ++j) out[j] = v[(*indices_)[j]];
    return out;
  }
  return *dense_ * v;
}

TraceMap validate_trace_map(const Matrix& J, const AuxSpace& aux,
                            const QuadraticForm& form, const Tolerances& tol) {
  if (J.cols() != form.dim) {
    fail(ErrorCode::ValidationError, "trace map column count must equal ground dimension");
  }
  if (J.rows() != aux.dim) {
    fail(ErrorCode::ValidationError, "trace map row count must equal auxiliary dimension");
  }
  if (J.rows() > J.cols()) {
    fail(ErrorCode::RankDeficient, "auxiliary dimension exceeds ground dimension");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(J.transpose());
  qr.setThreshold(tol.rank);
  if (qr.rank() < J.rows()) {
    std::ostringstream os;
    os << "trace map rank " << qr.rank() << " < " << J.rows()
       << "; range is not all of the auxiliary space";
    fail(ErrorCode::RankDeficient, os.str());
  }
  TraceMap out;
  out.dense_ = J;
  out.aux_ = aux;
  out.ground_dim_ = form.dim;
  return out;
}

TraceMap validate_trace_map(const std::vector<Index>& restriction,
                            const AuxSpace& aux, const QuadraticForm& form,
                            const Tolerances&) {
  if (static_cast<Index>(restriction.size()) != aux.dim) {
    fail(ErrorCode::ValidationError, "restriction size must equal auxiliary dimension");
  }
  std::set<Index> seen;
  for (Index idx : restriction) {
    if (idx < 0 || idx >= form.dim) {
      std::ostringstream os;
      os << "restriction index " << idx << " out of range [0, " << form.dim << ")";
      fail(ErrorCode::ValidationError, os.str());
    }
    if (!seen.insert(idx).second) {
      fail(ErrorCode::RankDeficient, "duplicate restriction index");
    }
  }
  TraceMap out;
  out.indices_ = restriction;
  out.aux_ = aux;
  out.ground_dim_ = form.dim;
  return out;
}

}  // namespace traceforms
