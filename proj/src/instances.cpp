#include "traceforms/instances.hpp"

#include <algorithm>
#include <numeric>

namespace traceforms {

std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) out(r, c) = dist(rng);
  return out;
}

Vector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector out(n);
  for (Index i = 0; i < n; ++i) out[i] = dist(rng);
  return out;
}

Matrix random_spd(Index n, std::mt19937_64& rng, double ridge) {
  const Matrix G = random_matrix(n, n, rng);
  return symmetric_part(G.transpose() * G / static_cast<double>(n)) +
         ridge * Matrix::Identity(n, n);
}

std::vector<Index> random_subset(Index n, Index k, std::mt19937_64& rng) {
  std::vector<Index> all(n);
  std::iota(all.begin(), all.end(), Index{0});
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

namespace {

Matrix random_diagonal(Index n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector d(n);
  for (Index i = 0; i < n; ++i) d[i] = dist(rng);
  return d.asDiagonal();
}

}  // namespace

Instance random_instance(std::uint64_t seed, const RandomInstanceOptions& opt) {
  auto rng = make_rng(seed);
  std::uniform_int_distribution<Index> dim_dist(opt.dim_min, opt.dim_max);
  const Index n = dim_dist(rng);
  std::uniform_int_distribution<Index> k_dist(1, std::max<Index>(1, n / 2));
  const Index k = k_dist(rng);

  const Matrix A = random_spd(n, rng, opt.ridge);
  Matrix M;
  if (opt.identity_mass) {
    M = Matrix::Identity(n, n);
  } else if (opt.diagonal_mass) {
    M = random_diagonal(n, rng, 0.5, 2.0);
  } else {
    M = random_spd(n, rng, 0.5);
  }
  const QuadraticForm form = validate_form(A, M);

  Matrix W;
  if (opt.diagonal_weight) {
    W = random_diagonal(k, rng, 0.5, 2.0);
  } else {
    W = (seed % 3 == 0) ? Matrix(Matrix::Identity(k, k))
                        : random_diagonal(k, rng, 0.5, 2.0);
  }
  const AuxSpace aux = validate_aux_space(W);

  const bool restriction = opt.restriction_only || (!opt.dense_only && seed % 2 == 0);
  Instance out{form, restriction
                         ? validate_trace_map(random_subset(n, k, rng), aux, form)
                         : validate_trace_map(random_matrix(k, n, rng), aux, form)};
  return out;
}

Instance graph_laplacian_instance(std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::uniform_int_distribution<Index> dim_dist(5, 24);
  const Index n = dim_dist(rng);
  std::uniform_real_distribution<double> weight(0.5, 2.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Matrix A = Matrix::Zero(n, n);
  auto add_edge = [&](Index i, Index j, double w) {
    A(i, i) += w;
    A(j, j) += w;
    A(i, j) -= w;
    A(j, i) -= w;
  };
  for (Index i = 0; i + 1 < n; ++i) add_edge(i, i + 1, weight(rng));  // backbone
  std::uniform_int_distribution<Index> node(0, n - 1);
  for (Index e = 0; e < n / 2; ++e) {
    const Index i = node(rng);
    const Index j = node(rng);
    if (i != j && A(i, j) == 0.0) add_edge(i, j, weight(rng));
  }
  for (Index i = 0; i < n; ++i) {
    if (unit(rng) < 0.5) A(i, i) += unit(rng);  // killing term
  }

  const Matrix M = random_diagonal(n, rng, 0.5, 2.0);
  const QuadraticForm form = validate_form(A, M);

  std::uniform_int_distribution<Index> k_dist(1, std::max<Index>(1, n / 2));
  const Index k = k_dist(rng);
  const AuxSpace aux = validate_aux_space(random_diagonal(k, rng, 0.5, 2.0));
  return Instance{form, validate_trace_map(random_subset(n, k, rng), aux, form)};
}

Matrix path_laplacian(Index n) {
  Matrix L = Matrix::Zero(n, n);
  for (Index i = 0; i + 1 < n; ++i) {
    L(i, i) += 1.0;
    L(i + 1, i + 1) += 1.0;
    L(i, i + 1) -= 1.0;
    L(i + 1, i) -= 1.0;
  }
  return L;
}

}  // namespace traceforms
