#include "traceforms/trace_engine.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace traceforms {

namespace {

std::vector<Index> complement_indices(const std::vector<Index>& kept, Index n) {
  std::vector<char> marked(n, 0);
  for (Index idx : kept) marked[idx] = 1;
  std::vector<Index> out;
  out.reserve(n - kept.size());
  for (Index i = 0; i < n; ++i) {
    if (!marked[i]) out.push_back(i);
  }
  return out;
}

/// Bunch-Kaufman factorization of a symmetric indefinite matrix, kept for
/// repeated solves with the bordered KKT system.
class SymmetricIndefiniteSolver {
 public:
  explicit SymmetricIndefiniteSolver(Matrix S) : f_(std::move(S)), ipiv_(f_.rows()) {
    const lapack_int n = static_cast<lapack_int>(f_.rows());
    const lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n, f_.data(), n, ipiv_.data());
    if (info != 0) {
      std::ostringstream os;
      os << "symmetric indefinite factorization failed (info " << info << ")";
      fail(ErrorCode::SaddleSingular, os.str());
    }
  }

  Matrix solve(Matrix rhs) const {
    const lapack_int n = static_cast<lapack_int>(f_.rows());
    const lapack_int nrhs = static_cast<lapack_int>(rhs.cols());
    const lapack_int info = LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n, nrhs, f_.data(), n,
                                           ipiv_.data(), rhs.data(), n);
    if (info != 0) {
      fail(ErrorCode::SaddleSingular, "symmetric indefinite solve failed");
    }
    return rhs;
  }

 private:
  Matrix f_;
  std::vector<lapack_int> ipiv_;
};

Matrix bordered_kkt_matrix(const Matrix& B, const Matrix& J) {
  const Index n = B.rows();
  const Index k = J.rows();
  Matrix S = Matrix::Zero(n + k, n + k);
  S.topLeftCorner(n, n) = B;
  S.topRightCorner(n, k) = J.transpose();
  S.bottomLeftCorner(k, n) = J;
  return S;
}

Matrix restriction_schur(const Matrix& A, const Matrix& M, double lambda,
                         const std::vector<Index>& kept) {
  const Index n = A.rows();
  const Index k = static_cast<Index>(kept.size());
  const std::vector<Index> interior = complement_indices(kept, n);
  const Index m = static_cast<Index>(interior.size());

  Matrix Tgg(k, k);
  for (Index r = 0; r < k; ++r)
    for (Index c = 0; c < k; ++c)
      Tgg(r, c) = A(kept[r], kept[c]) + lambda * M(kept[r], kept[c]);
  if (m == 0) return Tgg;

  Matrix Big(m, k);
  for (Index r = 0; r < m; ++r)
    for (Index c = 0; c < k; ++c)
      Big(r, c) = A(interior[r], kept[c]) + lambda * M(interior[r], kept[c]);

  Matrix Bii(m, m);
  for (Index r = 0; r < m; ++r)
    for (Index c = 0; c < m; ++c)
      Bii(r, c) = A(interior[r], interior[c]) + lambda * M(interior[r], interior[c]);

  // In-place Cholesky; Bii holds the factor afterwards.
  Eigen::LLT<Eigen::Ref<Matrix>> llt(Bii);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::SingularKernelBlock, "interior block not positive definite");
  }
  Tgg.noalias() -= Big.transpose() * llt.solve(Big);
  return symmetric_part(Tgg);
}

Matrix solve_spd(const Matrix& S, const Matrix& rhs, ErrorCode on_fail,
                 const char* what) {
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success) fail(on_fail, what);
  return llt.solve(rhs);
}

}  // namespace

KernelBasis kernel_basis(const TraceMap& J) {
  const Index n = J.ground_dim();
  const Index k = J.aux_dim();
  KernelBasis out;
  if (J.is_restriction()) {
    const std::vector<Index> interior = complement_indices(J.indices(), n);
    out.basis = Matrix::Zero(n, static_cast<Index>(interior.size()));
    for (Index c = 0; c < out.basis.cols(); ++c) out.basis(interior[c], c) = 1.0;
    out.exact_injection = true;
    return out;
  }
  Eigen::BDCSVD<Matrix> svd(J.matrix(), Eigen::ComputeFullV);
  out.basis = svd.matrixV().rightCols(n - k);
  return out;
}

Vector projection_apply(const ShiftedForm& shifted, const KernelBasis& kernel,
                        const Vector& u) {
  if (kernel.codim() == 0) return u;
  const Matrix& K = kernel.basis;
  const Matrix& B = shifted.shifted_matrix;
  const Matrix KtBK = symmetric_part(K.transpose() * B * K);
  Eigen::LDLT<Matrix> ldlt(KtBK);
  const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
  const double dmin = ldlt.vectorD().minCoeff();
  if (ldlt.info() != Eigen::Success || dmin <= 1e-14 * dmax) {
    fail(ErrorCode::SingularKernelBlock,
         "shifted form degenerate on ker J; projection undefined");
  }
  return u - K * ldlt.solve(K.transpose() * (B * u));
}

MinimizeResult dirichlet_minimize(const ShiftedForm& shifted, const TraceMap& J,
                                  const Vector& psi) {
  if (shifted.lambda <= 0.0) {
    fail(ErrorCode::NonPositiveLambda, "constrained minimization requires lambda > 0");
  }
  const Index n = shifted.shifted_matrix.rows();
  const Index k = J.aux_dim();
  const Matrix Jd = J.matrix();

  SymmetricIndefiniteSolver solver(bordered_kkt_matrix(shifted.shifted_matrix, Jd));
  Vector rhs = Vector::Zero(n + k);
  rhs.tail(k) = psi;
  const Vector sol = solver.solve(rhs);

  MinimizeResult out;
  out.minimizer = sol.head(n);
  out.value = out.minimizer.dot(shifted.shifted_matrix * out.minimizer);
  out.constraint_residual = (Jd * out.minimizer - psi).norm();
  if (out.constraint_residual > 1e-10 * std::max(1.0, psi.norm())) {
    fail(ErrorCode::SaddleSingular, "constraint residual too large after saddle solve");
  }
  return out;
}

const char* trace_path_name(TracePath path) {
  switch (path) {
    case TracePath::schur: return "schur";
    case TracePath::kkt: return "kkt";
    case TracePath::adjoint: return "adjoint";
  }
  return "unknown";
}

TracePath parse_trace_path(const std::string& name) {
  if (name == "schur") return TracePath::schur;
  if (name == "kkt") return TracePath::kkt;
  if (name == "adjoint") return TracePath::adjoint;
  fail(ErrorCode::ValidationError, "unknown trace path '" + name + "'");
}

TracePath auto_trace_path(const TraceMap& J) {
  return J.is_restriction() ? TracePath::schur : TracePath::adjoint;
}

TraceForm trace_form(const QuadraticForm& form, const TraceMap& J,
                     double lambda, TracePath path) {
  if (lambda <= 0.0) {
    fail(ErrorCode::NonPositiveLambda,
         "trace form requires lambda > 0; use trace_limit for the zero-shift form");
  }
  const Index n = form.dim;
  const Index k = J.aux_dim();
  const Matrix& W = J.aux().weight_matrix;

  TraceForm out;
  out.lambda = lambda;
  out.path = path;

  switch (path) {
    case TracePath::schur: {
      if (!J.is_restriction()) {
        fail(ErrorCode::PathUnavailable, "schur path requires a coordinate restriction map");
      }
      out.T = restriction_schur(form.form_matrix, form.mass_matrix, lambda, J.indices());
      break;
    }
    case TracePath::kkt: {
      const Matrix Jd = J.matrix();
      const Matrix B = form.form_matrix + lambda * form.mass_matrix;
      SymmetricIndefiniteSolver solver(bordered_kkt_matrix(B, Jd));
      Matrix rhs = Matrix::Zero(n + k, k);
      rhs.bottomRows(k) = Matrix::Identity(k, k);
      const Matrix sol = solver.solve(rhs);
      // The multiplier block carries -T columnwise.
      Matrix T = -sol.bottomRows(k);
      out.residuals["kkt_asymmetry"] = relative_asymmetry(T);
      out.residuals["kkt_constraint"] =
          (Jd * sol.topRows(n) - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
      out.T = symmetric_part(T);
      break;
    }
    case TracePath::adjoint: {
      const Matrix Jd = J.matrix();
      const Matrix B = form.form_matrix + lambda * form.mass_matrix;
      // J* = B^{-1} J^T W, then the operator is (J J*)^{-1}.
      const Matrix Jstar = solve_spd(B, Jd.transpose() * W, ErrorCode::SingularKernelBlock,
                                     "shifted matrix not positive definite");
      const Matrix G = Jd * Jstar;
      Eigen::PartialPivLU<Matrix> lu(G);
      if (lu.rcond() < 1e-15) {
        fail(ErrorCode::Singular, "trace-map Gram operator numerically singular");
      }
      out.operator_matrix = lu.solve(Matrix::Identity(k, k));
      Matrix T = W * out.operator_matrix;
      out.residuals["adjoint_asymmetry"] = relative_asymmetry(T);
      out.T = symmetric_part(T);
      break;
    }
  }

  if (out.operator_matrix.size() == 0 || path != TracePath::adjoint) {
    out.operator_matrix = solve_spd(W, out.T, ErrorCode::MassNotPD, "weight matrix not PD");
  }
  out.residuals["w_selfadjoint_gap"] =
      relative_asymmetry(W * out.operator_matrix);
  return out;
}

Matrix resolvent(const Matrix& operator_matrix, double alpha) {
  if (alpha <= 0.0) {
    fail(ErrorCode::ValidationError, "resolvent requires alpha > 0");
  }
  const Index k = operator_matrix.rows();
  Eigen::PartialPivLU<Matrix> lu(operator_matrix + alpha * Matrix::Identity(k, k));
  if (lu.rcond() < 1e-15) {
    fail(ErrorCode::Singular, "resolvent system numerically singular");
  }
  return lu.solve(Matrix::Identity(k, k));
}

std::vector<double> geometric_schedule(double start, double ratio, int count) {
  if (start <= 0.0 || ratio <= 0.0 || ratio >= 1.0 || count < 0) {
    fail(ErrorCode::ValidationError, "geometric schedule requires start > 0, ratio in (0,1)");
  }
  std::vector<double> out(count + 1);
  double v = start;
  for (int j = 0; j <= count; ++j, v *= ratio) out[j] = v;
  return out;
}

namespace {

/// Lifts aux coordinates back to the ground space: the injection for
/// restriction maps, the Moore-Penrose pseudoinverse otherwise.
Matrix lift_matrix(const TraceMap& J) {
  const Index n = J.ground_dim();
  const Index k = J.aux_dim();
  if (J.is_restriction()) {
    Matrix R = Matrix::Zero(n, k);
    for (Index j = 0; j < k; ++j) R(J.indices()[j], j) = 1.0;
    return R;
  }
  const Matrix Jd = J.matrix();
  const Matrix G = Jd * Jd.transpose();
  return Jd.transpose() * solve_spd(G, Matrix::Identity(k, k), ErrorCode::RankDeficient,
                                    "trace map Gram matrix singular");
}

/// Zero-shift reduction through the kernel block: R^T A R - Z^T S^{-1} Z with
/// S = K^T A K and Z = K^T A R. Valid when S is nonsingular.
bool exact_zero_shift(const QuadraticForm& form, const TraceMap& J, Matrix* out) {
  const KernelBasis kernel = kernel_basis(J);
  const Matrix R = lift_matrix(J);
  if (kernel.codim() == 0) {
    *out = symmetric_part(R.transpose() * form.form_matrix * R);
    return true;
  }
  const Matrix& K = kernel.basis;
  const Matrix S = symmetric_part(K.transpose() * form.form_matrix * K);
  Eigen::LDLT<Matrix> ldlt(S);
  const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-12 * dmax) {
    return false;
  }
  const Matrix AR = form.form_matrix * R;
  const Matrix Z = K.transpose() * AR;
  Matrix T = R.transpose() * AR - Z.transpose() * ldlt.solve(Z);
  *out = symmetric_part(T);
  return true;
}

}  // namespace

TraceLimitResult trace_limit(const QuadraticForm& form, const TraceMap& J,
                             const std::vector<double>& schedule, double tol_limit) {
  if (schedule.empty()) {
    fail(ErrorCode::ValidationError, "empty shift schedule");
  }
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    if (schedule[j] <= 0.0 || (j > 0 && schedule[j] >= schedule[j - 1])) {
      fail(ErrorCode::ValidationError, "schedule must be strictly decreasing and positive");
    }
  }
  const TracePath path = auto_trace_path(J);

  // Steps are independent and evaluated chunkwise in schedule order, then
  // truncated at the first convergent decrement; the truncation point (and
  // hence the result) does not depend on the chunk size.
  const std::size_t total = schedule.size();
  const std::size_t chunk = static_cast<std::size_t>(std::max(thread_count(), 1));
  std::vector<Matrix> forms(total);

  TraceLimitResult out;
  std::size_t last = total - 1;
  std::size_t computed = 0;
  while (computed < total && !out.converged) {
    const std::size_t hi = std::min(computed + chunk, total);
    parallel_for(static_cast<Index>(hi - computed), [&](Index i) {
      const std::size_t j = computed + static_cast<std::size_t>(i);
      forms[j] = trace_form(form, J, schedule[j], path).T;
    });
    for (std::size_t j = computed; j < hi; ++j) {
      TraceLimitStep step;
      step.lambda = schedule[j];
      step.T = forms[j];
      if (j > 0) {
        step.decrement = (forms[j] - forms[j - 1]).norm();
        const double scale = std::max(forms[j - 1].norm(), 1e-300);
        if (step.decrement <= tol_limit * scale) {
          out.converged = true;
          out.schedule.push_back(std::move(step));
          last = j;
          break;
        }
      }
      out.schedule.push_back(std::move(step));
    }
    computed = hi;
  }
  out.T0 = forms[last];
  out.operator_matrix = solve_spd(J.aux().weight_matrix, out.T0, ErrorCode::MassNotPD,
                                  "weight matrix not PD");

  out.exact_available = exact_zero_shift(form, J, &out.T0_exact);
  if (out.exact_available) {
    out.exact_gap = relative_gap(out.T0, out.T0_exact);
  }
  return out;
}

ShiftConsistencyReport shift_consistency_check(const QuadraticForm& form,
                                               const TraceMap& J, double beta) {
  if (beta <= 0.0) {
    fail(ErrorCode::ValidationError, "shift consistency requires beta > 0");
  }
  const TraceForm direct = trace_form(form, J, beta, auto_trace_path(J));

  QuadraticForm shifted_base = form;
  shifted_base.form_matrix = shift(form, beta).shifted_matrix;
  const TraceLimitResult limit = trace_limit(shifted_base, J, geometric_schedule(), 1e-10);

  ShiftConsistencyReport out;
  out.beta = beta;
  out.deviation = relative_gap(limit.T0, direct.T);
  out.pass = out.deviation <= 1e-6;
  return out;
}

}  // namespace traceforms
