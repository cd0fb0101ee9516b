#include "doctest.h"

#include "traceforms/instances.hpp"
#include "traceforms/trace_engine.hpp"

#include <cmath>
#include <cstdlib>

using namespace traceforms;

namespace {

Instance path_endpoints_instance(Index n) {
  const QuadraticForm f = validate_form(path_laplacian(n), Matrix::Identity(n, n));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(2, 2));
  return Instance{f, validate_trace_map(std::vector<Index>{0, n - 1}, aux, f)};
}

// Independent reduction oracle: eliminate the complement of `kept` from B by
// plain block arithmetic.
Matrix schur_oracle(const Matrix& B, const std::vector<Index>& kept) {
  const Index n = B.rows();
  std::vector<Index> rest;
  for (Index i = 0; i < n; ++i) {
    if (std::find(kept.begin(), kept.end(), i) == kept.end()) rest.push_back(i);
  }
  const Index k = static_cast<Index>(kept.size());
  const Index m = static_cast<Index>(rest.size());
  Matrix Bgg(k, k), Bgi(k, m), Bii(m, m);
  for (Index r = 0; r < k; ++r)
    for (Index c = 0; c < k; ++c) Bgg(r, c) = B(kept[r], kept[c]);
  for (Index r = 0; r < k; ++r)
    for (Index c = 0; c < m; ++c) Bgi(r, c) = B(kept[r], rest[c]);
  for (Index r = 0; r < m; ++r)
    for (Index c = 0; c < m; ++c) Bii(r, c) = B(rest[r], rest[c]);
  if (m == 0) return Bgg;
  return Bgg - Bgi * Bii.inverse() * Bgi.transpose();
}

double min_eig(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetric_part(S), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("kernel basis of the identity map is empty") {
  const Index n = 4;
  auto rng = make_rng(31);
  const QuadraticForm f = validate_form(random_spd(n, rng), Matrix::Identity(n, n));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(n, n));
  const TraceMap J = validate_trace_map(Matrix(Matrix::Identity(n, n)), aux, f);
  CHECK(kernel_basis(J).codim() == 0);
}

TEST_CASE("kernel basis of a single-coordinate restriction is the complement injection") {
  const QuadraticForm f = validate_form(Matrix::Zero(3, 3), Matrix::Identity(3, 3));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(1, 1));
  const TraceMap J = validate_trace_map(std::vector<Index>{0}, aux, f);
  const KernelBasis K = kernel_basis(J);
  REQUIRE(K.codim() == 2);
  CHECK(K.exact_injection);
  CHECK(K.basis(1, 0) == 1.0);
  CHECK(K.basis(2, 1) == 1.0);
  CHECK(K.basis(0, 0) == 0.0);
  CHECK(K.basis(0, 1) == 0.0);
}

TEST_CASE("kernel basis of a random dense map annihilates the map") {
  auto rng = make_rng(37);
  const QuadraticForm f = validate_form(Matrix::Zero(5, 5), Matrix::Identity(5, 5));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(2, 2));
  const TraceMap J = validate_trace_map(random_matrix(2, 5, rng), aux, f);
  const KernelBasis K = kernel_basis(J);
  REQUIRE(K.codim() == 3);
  CHECK((J.matrix() * K.basis).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((K.basis.transpose() * K.basis - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <=
        1e-12);
}

TEST_CASE("projection annihilates the kernel and fixes everything for J = I") {
  const Instance inst = path_endpoints_instance(4);
  const ShiftedForm s = shift(inst.form, 1.0);
  const KernelBasis K = kernel_basis(inst.map);

  Vector in_kernel = Vector::Zero(4);
  in_kernel[1] = 2.0;
  in_kernel[2] = -1.0;
  CHECK(projection_apply(s, K, in_kernel).norm() <= 1e-14);

  // identity embedding: empty kernel, projection is the identity
  const AuxSpace aux = validate_aux_space(Matrix::Identity(4, 4));
  const TraceMap full = validate_trace_map(std::vector<Index>{0, 1, 2, 3}, aux, inst.form);
  const KernelBasis K0 = kernel_basis(full);
  auto rng = make_rng(41);
  const Vector u = random_vector(4, rng);
  CHECK((projection_apply(s, K0, u) - u).norm() == 0.0);
}

TEST_CASE("projection satisfies its defining equations on a path graph") {
  const Instance inst = path_endpoints_instance(3);
  const ShiftedForm s = shift(inst.form, 1.0);
  const KernelBasis K = kernel_basis(inst.map);
  auto rng = make_rng(43);
  for (int t = 0; t < 10; ++t) {
    const Vector u = random_vector(3, rng);
    const Vector pu = projection_apply(s, K, u);
    CHECK((inst.map.apply(pu) - inst.map.apply(u)).norm() <= 1e-12);
    CHECK((K.basis.transpose() * s.shifted_matrix * pu).cwiseAbs().maxCoeff() <= 1e-12);
    // idempotence and shifted-form symmetry
    CHECK((projection_apply(s, K, pu) - pu).norm() <= 1e-12);
    const Vector v = random_vector(3, rng);
    const Vector pv = projection_apply(s, K, v);
    CHECK(pu.dot(s.shifted_matrix * v) ==
          doctest::Approx(u.dot(s.shifted_matrix * pv)).epsilon(1e-10));
  }
}

TEST_CASE("projection reports a singular kernel block at zero shift") {
  // zero form: A vanishes on the kernel, so the block is singular at lambda = 0
  const QuadraticForm f = validate_form(Matrix::Zero(3, 3), Matrix::Identity(3, 3));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(1, 1));
  const TraceMap J = validate_trace_map(std::vector<Index>{0}, aux, f);
  const KernelBasis K = kernel_basis(J);
  const ShiftedForm s0 = shift(f, 0.0);
  Vector u(3);
  u << 1, 2, 3;
  CHECK_THROWS_WITH_AS(projection_apply(s0, K, u), doctest::Contains("SingularKernelBlock"),
                       Error);
}

TEST_CASE("constrained minimization: zero trace gives zero") {
  const Instance inst = path_endpoints_instance(5);
  const MinimizeResult r = dirichlet_minimize(shift(inst.form, 0.7), inst.map,
                                              Vector::Zero(2));
  CHECK(r.value <= 1e-14);
  CHECK(r.minimizer.norm() <= 1e-12);
}

TEST_CASE("constrained minimization with the identity map has no freedom") {
  const Index n = 4;
  auto rng = make_rng(47);
  const QuadraticForm f = validate_form(random_spd(n, rng), Matrix::Identity(n, n));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(n, n));
  const TraceMap J = validate_trace_map(Matrix(Matrix::Identity(n, n)), aux, f);
  const ShiftedForm s = shift(f, 0.5);
  const Vector psi = random_vector(n, rng);
  const MinimizeResult r = dirichlet_minimize(s, J, psi);
  CHECK((r.minimizer - psi).norm() <= 1e-12 * psi.norm());
  CHECK(r.value == doctest::Approx(psi.dot(s.shifted_matrix * psi)).epsilon(1e-12));
}

TEST_CASE("constrained minimization agrees with the block-elimination oracle") {
  const Index n = 4;
  auto rng = make_rng(53);
  const QuadraticForm f = validate_form(random_spd(n, rng), random_spd(n, rng, 0.5));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(2, 2));
  const std::vector<Index> kept{0, 1};
  const TraceMap J = validate_trace_map(kept, aux, f);
  const ShiftedForm s = shift(f, 1.3);
  const Matrix oracle = schur_oracle(s.shifted_matrix, kept);
  for (int t = 0; t < 10; ++t) {
    const Vector psi = random_vector(2, rng);
    const MinimizeResult r = dirichlet_minimize(s, J, psi);
    CHECK(r.value == doctest::Approx(psi.dot(oracle * psi)).epsilon(1e-10));
  }
}

TEST_CASE("trace form with the identity embedding is the shifted matrix") {
  const Index n = 5;
  auto rng = make_rng(59);
  const QuadraticForm f = validate_form(random_spd(n, rng), Matrix::Identity(n, n));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(n, n));
  const TraceMap J = validate_trace_map(Matrix(Matrix::Identity(n, n)), aux, f);
  for (TracePath path : {TracePath::kkt, TracePath::adjoint}) {
    const TraceForm tf = trace_form(f, J, 0.8, path);
    CHECK(relative_gap(tf.T, Matrix(f.form_matrix + 0.8 * Matrix::Identity(n, n))) <= 1e-12);
  }
}

TEST_CASE("the three trace-form paths agree pairwise") {
  auto rng = make_rng(61);
  const Index n = 5;
  const QuadraticForm f = validate_form(random_spd(n, rng), random_spd(n, rng, 0.5));
  const AuxSpace aux = validate_aux_space(random_spd(2, rng, 0.5));
  const TraceMap J = validate_trace_map(std::vector<Index>{1, 3}, aux, f);
  const TraceForm a = trace_form(f, J, 0.9, TracePath::schur);
  const TraceForm b = trace_form(f, J, 0.9, TracePath::kkt);
  const TraceForm c = trace_form(f, J, 0.9, TracePath::adjoint);
  CHECK(relative_gap(a.T, b.T) <= 1e-8);
  CHECK(relative_gap(b.T, c.T) <= 1e-8);
  CHECK(relative_gap(a.T, c.T) <= 1e-8);
  // operator identity across the two operator-producing routes
  CHECK(relative_gap(c.operator_matrix, b.operator_matrix) <= 1e-8);
}

TEST_CASE("trace form values realize the constrained minimum") {
  for (std::uint64_t seed : {5ull, 6ull}) {
    const Instance inst = random_instance(seed);
    const double lambda = 1.1;
    const TraceForm tf = trace_form(inst.form, inst.map, lambda,
                                    inst.map.is_restriction() ? TracePath::schur
                                                              : TracePath::kkt);
    const ShiftedForm s = shift(inst.form, lambda);
    auto rng = make_rng(seed * 91);
    const Index k = inst.map.aux_dim();
    for (int t = 0; t < 20; ++t) {
      const Vector psi = random_vector(k, rng);
      const MinimizeResult r = dirichlet_minimize(s, inst.map, psi);
      const double quad = psi.dot(tf.T * psi);
      CHECK(std::abs(r.value - quad) <= 1e-8 * std::max(1.0, std::abs(quad)));
    }
  }
}

TEST_CASE("trace form requires a positive shift and a restriction for schur") {
  const Instance inst = path_endpoints_instance(4);
  CHECK_THROWS_WITH_AS(trace_form(inst.form, inst.map, 0.0, TracePath::schur),
                       doctest::Contains("NonPositiveLambda"), Error);
  auto rng = make_rng(67);
  const QuadraticForm f = validate_form(random_spd(4, rng), Matrix::Identity(4, 4));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(2, 2));
  const TraceMap dense = validate_trace_map(random_matrix(2, 4, rng), aux, f);
  CHECK_THROWS_WITH_AS(trace_form(f, dense, 1.0, TracePath::schur),
                       doctest::Contains("PathUnavailable"), Error);
}

TEST_CASE("resolvent of the zero operator and of the identity") {
  const Matrix Z = Matrix::Zero(3, 3);
  CHECK(relative_gap(resolvent(Z, 2.0), Matrix(0.5 * Matrix::Identity(3, 3))) <= 1e-14);
  const Matrix I = Matrix::Identity(3, 3);
  CHECK(relative_gap(resolvent(I, 1.0), Matrix(0.5 * I)) <= 1e-14);
}

TEST_CASE("resolvent spectrum lies in (0, 1/alpha]") {
  const Instance inst = random_instance(9, {.restriction_only = true});
  const TraceForm tf = trace_form(inst.form, inst.map, 0.6, TracePath::schur);
  for (double alpha : {0.5, 1.0, 2.0}) {
    const Matrix R = resolvent(tf.operator_matrix, alpha);
    // W-self-adjoint: symmetrize in the W inner product before the eigensolve
    const Matrix WR = inst.map.aux().weight_matrix * R;
    CHECK(relative_asymmetry(WR) <= 1e-10);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(symmetric_part(WR),
                                                        inst.map.aux().weight_matrix);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK(es.eigenvalues().maxCoeff() <= 1.0 / alpha + 1e-12);
  }
}

TEST_CASE("zero-shift limit of a definite form under the identity embedding") {
  const Index n = 4;
  auto rng = make_rng(71);
  const QuadraticForm f = validate_form(random_spd(n, rng), Matrix::Identity(n, n));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(n, n));
  const TraceMap J = validate_trace_map(std::vector<Index>{0, 1, 2, 3}, aux, f);
  const TraceLimitResult lim = trace_limit(f, J, geometric_schedule(), 1e-14);
  CHECK(relative_gap(lim.T0, f.form_matrix) <= 1e-12);
  CHECK(lim.exact_available);
  CHECK(relative_gap(lim.T0_exact, f.form_matrix) <= 1e-14);
}

TEST_CASE("limit iterates decrease monotonically and dominate the limit") {
  const Instance inst = random_instance(12, {.restriction_only = true});
  const TraceLimitResult lim = trace_limit(inst.form, inst.map, geometric_schedule(),
                                           1e-12);
  auto rng = make_rng(73);
  const Index k = inst.map.aux_dim();
  for (std::size_t j = 1; j < lim.schedule.size(); ++j) {
    for (int t = 0; t < 5; ++t) {
      const Vector psi = random_vector(k, rng);
      CHECK(psi.dot(lim.schedule[j].T * psi) <= psi.dot(lim.schedule[j - 1].T * psi) + 1e-10);
    }
    CHECK(min_eig(lim.schedule[j].T - lim.T0) >= -1e-10);
  }
  if (lim.exact_available) CHECK(lim.exact_gap <= 1e-6);
}

TEST_CASE("resolvent gaps to the limit shrink monotonically as forms") {
  const Instance inst = random_instance(21, {.restriction_only = true});
  const TraceLimitResult lim = trace_limit(inst.form, inst.map, geometric_schedule(1.0, 0.5, 24),
                                           0.0);
  const Matrix& W = inst.map.aux().weight_matrix;
  const Matrix R0 = resolvent(lim.operator_matrix, 1.0);
  auto rng = make_rng(79);
  const Index k = inst.map.aux_dim();
  std::vector<Vector> samples;
  for (int t = 0; t < 5; ++t) samples.push_back(random_vector(k, rng));

  double prev_gap_form = std::numeric_limits<double>::infinity();
  double last_norm_gap = 0.0;
  for (const auto& step : lim.schedule) {
    const Matrix Rl = resolvent(Matrix(W.ldlt().solve(step.T)), 1.0);
    const Matrix D = symmetric_part(W * (R0 - Rl));
    CHECK(min_eig(D) >= -1e-10);  // resolvents increase toward the limit
    double gap_form = 0.0;
    double norm_gap = 0.0;
    for (const Vector& psi : samples) {
      gap_form = std::max(gap_form, psi.dot(D * psi));
      const Vector d = (R0 - Rl) * psi;
      norm_gap = std::max(norm_gap, std::sqrt(std::abs(d.dot(W * d))));
    }
    CHECK(gap_form <= prev_gap_form + 1e-12);
    prev_gap_form = gap_form;
    last_norm_gap = norm_gap;
  }
  CHECK(last_norm_gap <= 1e-6);
}

TEST_CASE("limit returns the last iterate unconverged when the schedule is too short") {
  const Instance inst = random_instance(33, {.restriction_only = true});
  const TraceLimitResult lim = trace_limit(inst.form, inst.map, {1.0, 0.5, 0.25}, 0.0);
  CHECK_FALSE(lim.converged);
  CHECK(lim.schedule.size() == 3);
  CHECK(lim.T0.rows() == inst.map.aux_dim());
}

TEST_CASE("shift consistency holds on random instances") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const Instance inst = random_instance(seed);
    const ShiftConsistencyReport rep = shift_consistency_check(inst.form, inst.map, 1.0);
    CHECK(rep.pass);
    CHECK(rep.deviation <= 1e-6);
  }
}

TEST_CASE("shift consistency is tight for the identity embedding") {
  const Index n = 4;
  auto rng = make_rng(83);
  const QuadraticForm f = validate_form(random_spd(n, rng), Matrix::Identity(n, n));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(n, n));
  const TraceMap J = validate_trace_map(std::vector<Index>{0, 1, 2, 3}, aux, f);
  const ShiftConsistencyReport rep = shift_consistency_check(f, J, 0.5);
  CHECK(rep.deviation <= 1e-9);
}

TEST_CASE("limit results are identical across worker counts") {
  const Instance inst = random_instance(55, {.restriction_only = true});
  setenv("TRACEFORMS_THREADS", "1", 1);
  const TraceLimitResult a = trace_limit(inst.form, inst.map, geometric_schedule(1.0, 0.5, 16), 1e-9);
  setenv("TRACEFORMS_THREADS", "4", 1);
  const TraceLimitResult b = trace_limit(inst.form, inst.map, geometric_schedule(1.0, 0.5, 16), 1e-9);
  setenv("TRACEFORMS_THREADS", "0", 1);
  const TraceLimitResult c = trace_limit(inst.form, inst.map, geometric_schedule(1.0, 0.5, 16), 1e-9);
  unsetenv("TRACEFORMS_THREADS");
  REQUIRE(a.schedule.size() == b.schedule.size());
  REQUIRE(a.schedule.size() == c.schedule.size());
  CHECK((a.T0 - b.T0).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.T0 - c.T0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.converged == b.converged);
  for (std::size_t j = 0; j < a.schedule.size(); ++j) {
    CHECK((a.schedule[j].T - b.schedule[j].T).cwiseAbs().maxCoeff() == 0.0);
  }
}
