#include "traceforms/harmonic.hpp"

#include "traceforms/instances.hpp"

#include <cmath>

namespace traceforms {

namespace {

struct KernelBlock {
  Matrix KtAK;
  Eigen::LDLT<Matrix> ldlt;
  bool nonsingular = false;
};

KernelBlock kernel_block(const Matrix& A, const KernelBasis& kernel) {
  KernelBlock out;
  out.KtAK = symmetric_part(kernel.basis.transpose() * A * kernel.basis);
  if (out.KtAK.rows() == 0) {
    out.nonsingular = true;
    return out;
  }
  out.ldlt.compute(out.KtAK);
  const double dmax = out.ldlt.vectorD().cwiseAbs().maxCoeff();
  out.nonsingular = out.ldlt.info() == Eigen::Success &&
                    out.ldlt.vectorD().minCoeff() > 1e-12 * std::max(dmax, 1e-300);
  return out;
}

Matrix aux_lift(const TraceMap& J) {
  const Index n = J.ground_dim();
  const Index k = J.aux_dim();
  if (J.is_restriction()) {
    Matrix R = Matrix::Zero(n, k);
    for (Index j = 0; j < k; ++j) R(J.indices()[j], j) = 1.0;
    return R;
  }
  const Matrix Jd = J.matrix();
  return Jd.transpose() * (Jd * Jd.transpose()).ldlt().solve(Matrix::Identity(k, k));
}

}  // namespace

HarmonicDecomposition harmonic_decomposition(const QuadraticForm& form,
                                             const TraceMap& J) {
  HarmonicDecomposition out;
  out.kernel = kernel_basis(J);
  const Index n = form.dim;
  const KernelBlock block = kernel_block(form.form_matrix, out.kernel);
  out.direct_sum_ok = block.nonsingular;
  if (!out.direct_sum_ok) return out;

  if (out.kernel.codim() == 0) {
    out.extension_matrix = Matrix::Identity(n, n);
  } else {
    const Matrix& K = out.kernel.basis;
    out.extension_matrix =
        Matrix::Identity(n, n) - K * block.ldlt.solve(K.transpose() * form.form_matrix);
  }
  out.harmonic_basis = out.extension_matrix * aux_lift(J);
  return out;
}

Matrix harmonic_form(const HarmonicDecomposition& H, const QuadraticForm& form,
                     const TraceMap&) {
  if (!H.direct_sum_ok) {
    fail(ErrorCode::NoDirectSum, "harmonic space and ker J do not split the domain");
  }
  return symmetric_part(H.harmonic_basis.transpose() * form.form_matrix * H.harmonic_basis);
}

SymmetryReport extension_symmetry_check(const HarmonicDecomposition& H,
                                        const QuadraticForm& form,
                                        const TraceMap&, int samples,
                                        std::uint64_t seed) {
  if (!H.direct_sum_ok) {
    fail(ErrorCode::NoDirectSum, "harmonic space and ker J do not split the domain");
  }
  const Matrix AE = form.form_matrix * H.extension_matrix;  // E(u, Ext v) kernel
  auto rng = make_rng(seed);
  SymmetryReport out;
  for (int s = 0; s < samples; ++s) {
    const Vector u = random_vector(form.dim, rng);
    const Vector v = random_vector(form.dim, rng);
    const double lhs = u.dot(AE.transpose() * v);  // E(Ext u, v)
    const double rhs = u.dot(AE * v);
    out.max_deviation = std::max(out.max_deviation, std::abs(lhs - rhs));
  }
  const double scale = std::max(form.form_matrix.cwiseAbs().maxCoeff(), 1e-300);
  out.pass = out.max_deviation <= 1e-10 * scale;
  return out;
}

DirichletPart dirichlet_part(const QuadraticForm& form, const TraceMap& J) {
  DirichletPart out;
  out.kernel = kernel_basis(J);
  const Matrix& K = out.kernel.basis;
  const KernelBlock block = kernel_block(form.form_matrix, out.kernel);
  out.surjective = block.nonsingular;
  if (out.kernel.codim() == 0) {
    out.LD_matrix = Matrix(0, 0);
    return out;
  }
  const Matrix KtMK = symmetric_part(K.transpose() * form.mass_matrix * K);
  out.LD_matrix = KtMK.llt().solve(block.KtAK);
  return out;
}

Vector harmonic_lift(const QuadraticForm& form, const TraceMap& J,
                     const DirichletPart& D, const Vector& u, double lambda) {
  if (!D.surjective) {
    fail(ErrorCode::NotSurjective, "form restricted to ker J is degenerate");
  }
  if (lambda <= 0.0) {
    fail(ErrorCode::NonPositiveLambda, "harmonic lift requires lambda > 0");
  }
  const Vector pu = projection_apply(shift(form, lambda), D.kernel, u);
  if (D.kernel.codim() == 0) return pu;
  const Matrix& K = D.kernel.basis;
  const Matrix KtAK = symmetric_part(K.transpose() * form.form_matrix * K);
  const Vector zk = KtAK.ldlt().solve(K.transpose() * (form.mass_matrix * pu));
  return lambda * (K * zk) + pu;
}

Matrix penalized_projection(const QuadraticForm& form, const TraceMap& J) {
  const Index n = form.dim;
  const KernelBasis kernel = kernel_basis(J);
  if (kernel.codim() == 0) return Matrix::Identity(n, n);

  const Matrix Jd = J.matrix();
  const Matrix EJ =
      symmetric_part(form.form_matrix + Jd.transpose() * J.aux().weight_matrix * Jd);
  const Matrix& K = kernel.basis;
  const Matrix KtEK = symmetric_part(K.transpose() * EJ * K);
  Eigen::LDLT<Matrix> ldlt(KtEK);
  const double dmax = ldlt.vectorD().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success ||
      ldlt.vectorD().minCoeff() <= 1e-12 * std::max(dmax, 1e-300)) {
    fail(ErrorCode::NoDirectSum, "penalized metric degenerate on ker J");
  }
  const Matrix P = Matrix::Identity(n, n) - K * ldlt.solve(K.transpose() * EJ);

  // Same projection through the unpenalized kernel block; the two must agree.
  const HarmonicDecomposition H = harmonic_decomposition(form, J);
  if (!H.direct_sum_ok) {
    fail(ErrorCode::NoDirectSum, "harmonic space and ker J do not split the domain");
  }
  const double gap = (P - H.extension_matrix).cwiseAbs().maxCoeff();
  const double scale = std::max(H.extension_matrix.cwiseAbs().maxCoeff(), 1.0);
  if (gap > 1e-12 * scale) {
    fail(ErrorCode::InternalCheckFailed,
         "penalized projection deviates from the harmonic extension");
  }
  return P;
}

EllipticityResult ellipticity_scan(const QuadraticForm& form, const TraceMap& J,
                                   const std::vector<double>& beta_grid) {
  const Matrix Jd = J.matrix();
  const Matrix JtWJ = symmetric_part(Jd.transpose() * J.aux().weight_matrix * Jd);
  const Matrix E1 = symmetric_part(form.form_matrix + form.mass_matrix);

  EllipticityResult out;
  out.alpha_best = -std::numeric_limits<double>::infinity();
  for (double beta : beta_grid) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(
        symmetric_part(form.form_matrix + beta * JtWJ), E1);
    const double alpha = es.eigenvalues().minCoeff();
    out.grid.emplace_back(beta, alpha);
    if (alpha > out.alpha_best) {
      out.alpha_best = alpha;
      out.beta_best = beta;
    }
  }
  out.elliptic = out.alpha_best > 1e-12;
  return out;
}

}  // namespace traceforms
