#include "doctest.h"

#include "traceforms/form_core.hpp"
#include "traceforms/instances.hpp"

using namespace traceforms;

namespace {

Matrix path3() { return path_laplacian(3); }

}  // namespace

TEST_CASE("validate_form accepts the zero form") {
  const Index n = 4;
  const QuadraticForm f = validate_form(Matrix::Zero(n, n), Matrix::Identity(n, n));
  CHECK(f.dim == n);
  auto rng = make_rng(7);
  for (int s = 0; s < 10; ++s) {
    const Vector u = random_vector(n, rng);
    CHECK(u.dot(f.form_matrix * u) == 0.0);
  }
}

TEST_CASE("validate_form accepts a path-graph Laplacian") {
  const QuadraticForm f = validate_form(path3(), Matrix::Identity(3, 3));
  CHECK(f.min_pivot_a >= -1e-12);
  CHECK(f.form_matrix(1, 1) == doctest::Approx(2.0));
}

TEST_CASE("validate_form rejects an indefinite form matrix") {
  Matrix A = Matrix::Identity(3, 3);
  A(2, 2) = -0.1;
  CHECK_THROWS_WITH_AS(validate_form(A, Matrix::Identity(3, 3)), doctest::Contains("NotPSD"),
                       Error);
}

TEST_CASE("validate_form rejects asymmetry beyond tolerance and repairs below it") {
  Matrix A = path3();
  A(0, 1) += 1e-3;
  CHECK_THROWS_AS(validate_form(A, Matrix::Identity(3, 3)), Error);

  Matrix B = path3();
  B(0, 1) += 1e-12;
  const QuadraticForm f = validate_form(B, Matrix::Identity(3, 3));
  CHECK(f.asymmetry_a > 0.0);
  CHECK(f.form_matrix(0, 1) == f.form_matrix(1, 0));
}

TEST_CASE("validate_form rejects a non-definite mass matrix") {
  Matrix M = Matrix::Identity(3, 3);
  M(1, 1) = 0.0;
  CHECK_THROWS_WITH_AS(validate_form(path3(), M), doctest::Contains("MassNotPD"), Error);
}

TEST_CASE("shift at zero returns the form matrix unchanged") {
  const QuadraticForm f = validate_form(path3(), Matrix::Identity(3, 3));
  const ShiftedForm s = shift(f, 0.0);
  CHECK((s.shifted_matrix - f.form_matrix).norm() == 0.0);
}

TEST_CASE("shift by one with identity mass adds the identity") {
  const QuadraticForm f = validate_form(path3(), Matrix::Identity(3, 3));
  const ShiftedForm s = shift(f, 1.0);
  CHECK((s.shifted_matrix - (f.form_matrix + Matrix::Identity(3, 3))).norm() == 0.0);
}

TEST_CASE("shift is monotone in lambda on sampled vectors") {
  auto rng = make_rng(11);
  const Matrix A = random_spd(6, rng, 0.0);
  const Matrix M = random_spd(6, rng, 0.5);
  const QuadraticForm f = validate_form(A, M);
  const ShiftedForm s1 = shift(f, 0.3);
  const ShiftedForm s2 = shift(f, 1.7);
  for (int s = 0; s < 20; ++s) {
    const Vector u = random_vector(6, rng);
    CHECK(u.dot(s1.shifted_matrix * u) <= u.dot(s2.shifted_matrix * u) + 1e-12);
  }
}

TEST_CASE("shift is affine in lambda") {
  auto rng = make_rng(13);
  const Matrix A = random_spd(5, rng, 0.0);
  const Matrix M = random_spd(5, rng, 0.5);
  const QuadraticForm f = validate_form(A, M);

  // exact against the lambda = 0 anchor
  const Matrix lhs = shift(f, 0.0).shifted_matrix + 0.75 * f.mass_matrix;
  CHECK((lhs - shift(f, 0.75).shifted_matrix).cwiseAbs().maxCoeff() == 0.0);

  // within one rounding step for a general pair
  const Matrix lhs2 = shift(f, 0.25).shifted_matrix + (1.25 - 0.25) * f.mass_matrix;
  const Matrix rhs2 = shift(f, 1.25).shifted_matrix;
  CHECK((lhs2 - rhs2).cwiseAbs().maxCoeff() <= 1e-15 * rhs2.cwiseAbs().maxCoeff());
}

TEST_CASE("identity trace map validates (natural-embedding case)") {
  const Index n = 5;
  auto rng = make_rng(17);
  const QuadraticForm f = validate_form(random_spd(n, rng), random_spd(n, rng, 0.5));
  const AuxSpace aux = validate_aux_space(f.mass_matrix);
  const TraceMap J = validate_trace_map(Matrix(Matrix::Identity(n, n)), aux, f);
  CHECK_FALSE(J.is_restriction());
  CHECK(J.aux_dim() == n);
}

TEST_CASE("endpoint restriction on a path validates with rank 2") {
  const Index n = 6;
  const QuadraticForm f = validate_form(path_laplacian(n), Matrix::Identity(n, n));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(2, 2));
  const TraceMap J = validate_trace_map(std::vector<Index>{0, n - 1}, aux, f);
  CHECK(J.is_restriction());
  CHECK(J.aux_dim() == 2);
}

TEST_CASE("a trace map with two equal rows is rank deficient") {
  const Index n = 4;
  const QuadraticForm f = validate_form(Matrix::Zero(n, n), Matrix::Identity(n, n));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(2, 2));
  Matrix J(2, n);
  J.row(0) << 1, 2, 3, 4;
  J.row(1) = J.row(0);
  CHECK_THROWS_WITH_AS(validate_trace_map(J, aux, f), doctest::Contains("RankDeficient"),
                       Error);
}

TEST_CASE("restriction indices are checked for range and duplicates") {
  const Index n = 3;
  const QuadraticForm f = validate_form(Matrix::Zero(n, n), Matrix::Identity(n, n));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(2, 2));
  CHECK_THROWS_AS(validate_trace_map(std::vector<Index>{0, 5}, aux, f), Error);
  CHECK_THROWS_WITH_AS(validate_trace_map(std::vector<Index>{1, 1}, aux, f),
                       doctest::Contains("RankDeficient"), Error);
}

TEST_CASE("restriction fast path matches the dense path") {
  auto rng = make_rng(23);
  const Index n = 9;
  const QuadraticForm f = validate_form(random_spd(n, rng), random_spd(n, rng, 0.5));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(3, 3));
  const std::vector<Index> idx{1, 4, 7};
  const TraceMap fast = validate_trace_map(idx, aux, f);
  const TraceMap dense = validate_trace_map(fast.matrix(), aux, f);
  for (int s = 0; s < 25; ++s) {
    const Vector v = random_vector(n, rng);
    const Vector a = fast.apply(v);
    const Vector b = dense.apply(v);
    CHECK((a - b).norm() <= 1e-14 * std::max(1.0, a.norm()));
  }
}

TEST_CASE("validated forms stay PSD on sampled vectors") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
    const Instance inst = random_instance(seed);
    auto rng = make_rng(seed + 100);
    for (int s = 0; s < 10; ++s) {
      const Vector u = random_vector(inst.form.dim, rng);
      CHECK(u.dot(inst.form.form_matrix * u) >= -1e-10 * u.squaredNorm());
      if (u.norm() > 0) CHECK(u.dot(inst.form.mass_matrix * u) > 0.0);
    }
  }
}
