#include "traceforms/markov.hpp"

#include "traceforms/instances.hpp"

#include <algorithm>
#include <cmath>

namespace traceforms {

namespace {

bool is_diagonal(const Matrix& X) {
  const double scale = std::max(X.cwiseAbs().maxCoeff(), 1e-300);
  Matrix off = X;
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff() <= 1e-14 * scale;
}

double quad(const Matrix& A, const Vector& u) { return u.dot(A * u); }

}  // namespace

Vector unit_contraction(const Vector& u) {
  return u.cwiseMax(0.0).cwiseMin(1.0);
}

StructuralReport structural_check(const Matrix& A) {
  const double scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
  StructuralReport out;
  out.offdiag_max = -std::numeric_limits<double>::infinity();
  out.rowsum_min = std::numeric_limits<double>::infinity();
  for (Index r = 0; r < A.rows(); ++r) {
    double rowsum = 0.0;
    for (Index c = 0; c < A.cols(); ++c) {
      rowsum += A(r, c);
      if (r != c) out.offdiag_max = std::max(out.offdiag_max, A(r, c));
    }
    out.rowsum_min = std::min(out.rowsum_min, rowsum);
  }
  if (A.rows() == 1) out.offdiag_max = 0.0;
  out.pass = out.offdiag_max <= 1e-12 * scale && out.rowsum_min >= -1e-10 * scale;
  return out;
}

ContractionReport dirichlet_form_check(const Matrix& A, const Matrix& mass,
                                       int samples, std::uint64_t seed) {
  if (mass.size() > 0 && !is_diagonal(mass)) {
    fail(ErrorCode::NonDiagonalMass,
         "lattice operations need a diagonal mass matrix");
  }
  const Index n = A.rows();
  ContractionReport out;
  out.structural = structural_check(A);

  auto rng = make_rng(seed);
  std::cauchy_distribution<double> heavy(0.0, 1.0);
  out.worst_violation = -std::numeric_limits<double>::infinity();
  auto probe = [&](const Vector& u) {
    const double gap = quad(A, unit_contraction(u)) - quad(A, u);
    out.worst_violation = std::max(out.worst_violation, gap);
  };
  for (int s = 0; s < samples; ++s) {
    Vector u(n);
    for (Index i = 0; i < n; ++i) u[i] = heavy(rng);
    probe(u);
  }
  // Two-coordinate probes u = a e_i - s e_j; these witness positive
  // off-diagonal entries directly.
  const double amps[] = {0.25, 0.5, 1.0, 1.5};
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      for (double a : amps) {
        for (double s : amps) {
          Vector u = Vector::Zero(n);
          u[i] = a;
          u[j] = -s;
          probe(u);
          u[i] = 1.0 + a;
          probe(u);
        }
      }
    }
  }
  out.sampling_pass = out.worst_violation <= 1e-10 * std::max(A.cwiseAbs().maxCoeff(), 1.0);
  out.pass = out.structural.pass && out.sampling_pass;
  return out;
}

MarkovReport markov_resolvent_check(const Matrix& T, const Matrix& W,
                                    const std::vector<double>& alphas, int samples,
                                    std::uint64_t seed) {
  if (!is_diagonal(W)) {
    fail(ErrorCode::NonDiagonalWeight,
         "box test needs a diagonal weight matrix");
  }
  const Index k = T.rows();
  MarkovReport out;
  out.alpha_list = alphas;
  out.structural = structural_check(T);

  // interior samples plus box vertices (all of them up to 2^10)
  std::vector<Vector> psis;
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < samples; ++s) {
    Vector p(k);
    for (Index i = 0; i < k; ++i) p[i] = unit(rng);
    psis.push_back(std::move(p));
  }
  if (k <= 10) {
    for (std::uint64_t bits = 0; bits < (1ull << k); ++bits) {
      Vector p(k);
      for (Index i = 0; i < k; ++i) p[i] = (bits >> i) & 1 ? 1.0 : 0.0;
      psis.push_back(std::move(p));
    }
  } else {
    std::bernoulli_distribution coin(0.5);
    for (int s = 0; s < 1024; ++s) {
      Vector p(k);
      for (Index i = 0; i < k; ++i) p[i] = coin(rng) ? 1.0 : 0.0;
      psis.push_back(std::move(p));
    }
  }

  out.max_box_violation = 0.0;
  for (double alpha : alphas) {
    // alpha (W^{-1} T + alpha)^{-1} psi = alpha (T + alpha W)^{-1} W psi
    Eigen::LLT<Matrix> llt(symmetric_part(T + alpha * W));
    if (llt.info() != Eigen::Success) {
      fail(ErrorCode::Singular, "shifted reduced matrix not positive definite");
    }
    for (const Vector& psi : psis) {
      const Vector r = alpha * llt.solve(W * psi);
      const double above = (r.array() - 1.0).maxCoeff();
      const double below = (-r.array()).maxCoeff();
      out.max_box_violation = std::max({out.max_box_violation, above, below});
    }
  }
  out.pass = out.max_box_violation <= 1e-8;
  return out;
}

Vector one_potential(const QuadraticForm& form, const TraceMap& J, const Vector& psi) {
  const Matrix B = form.form_matrix + form.mass_matrix;
  const Vector rhs = J.matrix().transpose() * (J.aux().weight_matrix * psi);
  Eigen::LLT<Matrix> llt(B);
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::Singular, "unit-shifted matrix not positive definite");
  }
  return llt.solve(rhs);
}

PotentialIdentityReport potential_identity_check(const QuadraticForm& form,
                                                 const TraceMap& J, int samples,
                                                 std::uint64_t seed) {
  const Index k = J.aux_dim();
  const Matrix& W = J.aux().weight_matrix;
  const TraceForm tf = trace_form(form, J, 1.0,
                                  J.is_restriction() ? TracePath::schur : TracePath::kkt);
  Eigen::LLT<Matrix> t_llt(tf.T);
  if (t_llt.info() != Eigen::Success) {
    fail(ErrorCode::Singular, "reduced form at unit shift not positive definite");
  }
  const Matrix Jd = J.matrix();

  PotentialIdentityReport out;
  auto rng = make_rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vector psi = random_vector(k, rng);
    const Vector lhs = t_llt.solve(W * psi);
    const Vector rhs = Jd * one_potential(form, J, psi);
    const double resid = (lhs - rhs).norm() / std::max(rhs.norm(), 1e-300);
    out.max_residual = std::max(out.max_residual, resid);
  }
  out.pass = out.max_residual <= 1e-8;
  return out;
}

}  // namespace traceforms
