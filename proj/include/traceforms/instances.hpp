#pragma once

#include "traceforms/form_core.hpp"

#include <random>

namespace traceforms {

/// Seeded generators for the demo and self-test instance families. All
/// outputs are deterministic functions of the seed.

std::mt19937_64 make_rng(std::uint64_t seed);

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng);
Vector random_vector(Index n, std::mt19937_64& rng);

/// G^T G / n + ridge * I; eigenvalues bounded below by ridge.
Matrix random_spd(Index n, std::mt19937_64& rng, double ridge = 1.0);

/// k distinct indices in [0, n), sorted.
std::vector<Index> random_subset(Index n, Index k, std::mt19937_64& rng);

struct RandomInstanceOptions {
  Index dim_min = 4;
  Index dim_max = 32;
  bool restriction_only = false;
  bool dense_only = false;
  bool identity_mass = false;
  bool diagonal_mass = false;
  bool diagonal_weight = false;
  double ridge = 1.0;
};

struct Instance {
  QuadraticForm form;
  TraceMap map;
};

/// Random SPD ground form with a random full-rank trace map; the map is a
/// coordinate restriction for even seeds and dense otherwise (subject to the
/// options).
Instance random_instance(std::uint64_t seed, const RandomInstanceOptions& opt = {});

/// Weighted-graph Laplacian plus nonnegative killing on a connected graph,
/// with diagonal mass and weight matrices and a restriction trace map.
Instance graph_laplacian_instance(std::uint64_t seed);

/// Unweighted path-graph Laplacian on n nodes.
Matrix path_laplacian(Index n);

}  // namespace traceforms
