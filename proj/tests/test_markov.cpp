#include "doctest.h"

#include "traceforms/instances.hpp"
#include "traceforms/markov.hpp"

#include <cmath>

using namespace traceforms;

TEST_CASE("unit contraction clamps to the box and is idempotent") {
  Vector u(3);
  u << -1.0, 0.5, 2.0;
  const Vector c = unit_contraction(u);
  CHECK(c[0] == 0.0);
  CHECK(c[1] == 0.5);
  CHECK(c[2] == 1.0);
  CHECK((unit_contraction(c) - c).norm() == 0.0);

  Vector inside(4);
  inside << 0.0, 0.3, 0.7, 1.0;
  CHECK((unit_contraction(inside) - inside).norm() == 0.0);
}

TEST_CASE("contraction check passes on graph Laplacians and the zero form") {
  const Matrix L = path_laplacian(5);
  const ContractionReport r = dirichlet_form_check(L, Matrix(), 200, 42);
  CHECK(r.structural.pass);
  CHECK(r.sampling_pass);
  CHECK(r.pass);

  const ContractionReport z = dirichlet_form_check(Matrix::Zero(3, 3), Matrix(), 100, 42);
  CHECK(z.pass);
}

TEST_CASE("positive off-diagonal fails both the structural and the sampling test") {
  Matrix A(2, 2);
  A << 1.0, 0.5, 0.5, 1.0;
  const ContractionReport r = dirichlet_form_check(A, Matrix(), 200, 42);
  CHECK_FALSE(r.structural.pass);
  CHECK(r.structural.offdiag_max == doctest::Approx(0.5));
  CHECK_FALSE(r.sampling_pass);  // a clamped vector with larger energy exists
  CHECK(r.worst_violation > 0.0);
}

TEST_CASE("contraction check requires a diagonal mass matrix") {
  auto rng = make_rng(3);
  const Matrix M = random_spd(3, rng, 0.5);
  CHECK_THROWS_WITH_AS(dirichlet_form_check(path_laplacian(3), M, 10, 1),
                       doctest::Contains("NonDiagonalMass"), Error);
}

TEST_CASE("box test passes for the reduced path Laplacian and the pure weight") {
  const Index n = 7;
  const QuadraticForm f = validate_form(path_laplacian(n), Matrix::Identity(n, n));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(2, 2));
  const TraceMap J = validate_trace_map(std::vector<Index>{0, n - 1}, aux, f);
  for (double lambda : {0.25, 1.0, 4.0}) {
    const TraceForm tf = trace_form(f, J, lambda, TracePath::schur);
    const MarkovReport rep = markov_resolvent_check(tf.T, aux.weight_matrix,
                                                    {0.5, 1.0, 2.0}, 100, 11);
    CHECK(rep.pass);
    CHECK(rep.structural.pass);
  }

  // T = W: the resolvent scales by alpha/(1+alpha), which stays in the box
  const Matrix W = Vector::LinSpaced(3, 0.5, 1.5).asDiagonal();
  const MarkovReport rep = markov_resolvent_check(W, W, {0.5, 1.0, 2.0}, 100, 13);
  CHECK(rep.pass);
  CHECK(rep.max_box_violation <= 1e-14);
}

TEST_CASE("box test requires a diagonal weight") {
  auto rng = make_rng(5);
  const Matrix W = random_spd(2, rng, 0.5);
  CHECK_THROWS_WITH_AS(markov_resolvent_check(Matrix::Identity(2, 2), W, {1.0}, 10, 1),
                       doctest::Contains("NonDiagonalWeight"), Error);
}

TEST_CASE("reduced graph forms stay Markov at positive shifts and in the limit") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = graph_laplacian_instance(seed);
    const Matrix& W = inst.map.aux().weight_matrix;
    for (double lambda : {0.25, 1.0, 4.0}) {
      const TraceForm tf = trace_form(inst.form, inst.map, lambda, TracePath::schur);
      const MarkovReport rep = markov_resolvent_check(tf.T, W, {0.5, 1.0, 2.0}, 60, seed);
      CHECK(rep.pass);
      // structural pass must imply sampling pass
      if (rep.structural.pass) {
        const ContractionReport c = dirichlet_form_check(tf.T, W, 60, seed);
        CHECK(c.sampling_pass);
      }
    }
    const TraceLimitResult lim = trace_limit(inst.form, inst.map);
    CHECK(markov_resolvent_check(lim.T0, W, {0.5, 1.0, 2.0}, 60, seed).pass);
  }
}

TEST_CASE("potential representative: zero density and the trivial instance") {
  const Index n = 4;
  const QuadraticForm f = validate_form(Matrix::Zero(n, n), Matrix::Identity(n, n));
  const AuxSpace aux = validate_aux_space(Matrix::Identity(n, n));
  const TraceMap J = validate_trace_map(std::vector<Index>{0, 1, 2, 3}, aux, f);

  CHECK(one_potential(f, J, Vector::Zero(n)).norm() == 0.0);

  auto rng = make_rng(17);
  const Vector psi = random_vector(n, rng);
  // A = 0, M = W = I: (A + M) U = psi exactly
  CHECK((one_potential(f, J, psi) - psi).norm() <= 1e-14 * psi.norm());
}

TEST_CASE("potential representative satisfies its defining relation") {
  for (std::uint64_t seed : {21ull, 22ull, 23ull}) {
    const Instance inst = random_instance(seed);
    auto rng = make_rng(seed + 900);
    const Vector psi = random_vector(inst.map.aux_dim(), rng);
    const Vector U = one_potential(inst.form, inst.map, psi);
    const Matrix B = inst.form.form_matrix + inst.form.mass_matrix;
    const Vector rhs = inst.map.matrix().transpose() * (inst.map.aux().weight_matrix * psi);
    CHECK((B * U - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("potential identity links the reduced form inverse to the potential") {
  for (std::uint64_t seed = 31; seed <= 40; ++seed) {
    const Instance inst = random_instance(seed);
    const PotentialIdentityReport rep = potential_identity_check(inst.form, inst.map, 20,
                                                                 seed);
    CHECK(rep.pass);
    CHECK(rep.max_residual <= 1e-8);
  }

  // identity embedding with W = M: both sides reduce to (A+M)^{-1} M psi
  const Index n = 5;
  auto rng = make_rng(55);
  const Matrix M = Vector::LinSpaced(n, 0.5, 1.5).asDiagonal();
  const QuadraticForm f = validate_form(random_spd(n, rng), M);
  const AuxSpace aux = validate_aux_space(M);
  const TraceMap J = validate_trace_map(std::vector<Index>{0, 1, 2, 3, 4}, aux, f);
  CHECK(potential_identity_check(f, J, 20, 77).pass);
}
