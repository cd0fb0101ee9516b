#include "traceforms/oracles.hpp"

#include <algorithm>
#include <cmath>

namespace traceforms {

namespace {

double stable_ratio_s_over_sinh(double s) {
  if (s > 30.0) return 2.0 * s * std::exp(-s);  // relative error below e^{-60}
  return s / std::sinh(s);
}

}  // namespace

ChainTraceCoefficients chain_coefficients(double lambda) {
  if (lambda <= 0.0) {
    fail(ErrorCode::NonPositiveLambda, "chain coefficients require lambda > 0");
  }
  ChainTraceCoefficients out;
  out.lambda = lambda;
  if (lambda < 1e-8) {
    // series around zero; the quadratic terms keep the crossover seamless
    out.c_off = 1.0 - lambda / 6.0 + 7.0 * lambda * lambda / 360.0;
    out.c_diag = lambda * (1.0 - lambda / 12.0);
    return out;
  }
  const double s = std::sqrt(lambda);
  out.c_off = stable_ratio_s_over_sinh(s);
  out.c_diag = 2.0 * s * std::tanh(0.5 * s);
  return out;
}

double chain_trace_value(double lambda, const Vector& psi) {
  const ChainTraceCoefficients c = chain_coefficients(lambda);
  const Index m = psi.size();
  if (m == 0) return 0.0;
  double jumps = psi[0] * psi[0] + psi[m - 1] * psi[m - 1];
  for (Index i = 0; i + 1 < m; ++i) {
    const double d = psi[i + 1] - psi[i];
    jumps += d * d;
  }
  return c.c_off * jumps + c.c_diag * psi.squaredNorm();
}

double halfspace_symbol(double xi, double lambda) {
  if (lambda < 0.0) {
    fail(ErrorCode::ValidationError, "half-space symbol requires lambda >= 0");
  }
  return std::sqrt(xi * xi + lambda);
}

double counterexample_value(double n, double lambda, double a, double b) {
  if (n < 1.0) {
    fail(ErrorCode::ValidationError, "family index n must be >= 1");
  }
  if (lambda < 0.0) {
    fail(ErrorCode::ValidationError, "lambda must be >= 0");
  }
  if (lambda == 0.0) {
    return (b - a) * (b - a) / n + a * a + b * b;
  }
  const double s = std::sqrt(n * lambda);
  const double off = -stable_ratio_s_over_sinh(s) * (2.0 * a * b / n);
  const double diag = (a * a + b * b) * s / (n * std::tanh(s));
  return off + diag + a * a + b * b;
}

FemInstance fem_interval(Index N, double x0, double x1) {
  if (N < 2 || !(x1 > x0)) {
    fail(ErrorCode::ValidationError, "mesh needs at least two nodes and x1 > x0");
  }
  FemInstance out;
  out.mesh_size = N;
  out.x0 = x0;
  out.x1 = x1;
  out.h = (x1 - x0) / static_cast<double>(N - 1);
  out.node_coords = Vector::LinSpaced(N, x0, x1);
  out.A = Matrix::Zero(N, N);
  out.M = Matrix::Zero(N, N);
  const double inv_h = 1.0 / out.h;
  for (Index e = 0; e + 1 < N; ++e) {
    out.A(e, e) += inv_h;
    out.A(e + 1, e + 1) += inv_h;
    out.A(e, e + 1) -= inv_h;
    out.A(e + 1, e) -= inv_h;
    out.M(e, e) += out.h / 3.0;
    out.M(e + 1, e + 1) += out.h / 3.0;
    out.M(e, e + 1) += out.h / 6.0;
    out.M(e + 1, e) += out.h / 6.0;
  }
  return out;
}

QuadraticForm fem_form(const FemInstance& fem) {
  QuadraticForm out;
  out.dim = fem.mesh_size;
  out.form_matrix = fem.A;
  out.mass_matrix = fem.M;
  return out;
}

namespace {

struct ChainSetup {
  QuadraticForm form;
  TraceMap map;
  Index k = 0;
};

ChainSetup chain_setup(int L, int nodes_per_unit, const Vector& weights) {
  if (L < 2 || nodes_per_unit < 1) {
    fail(ErrorCode::ValidationError, "chain demo needs L >= 2 and a positive node density");
  }
  const Index N = 2 * static_cast<Index>(L) * nodes_per_unit + 1;
  const Index k = 2 * static_cast<Index>(L) + 1;
  const FemInstance fem = fem_interval(N, -static_cast<double>(L), static_cast<double>(L));

  Vector w = weights.size() == 0 ? Vector::Ones(k) : weights;
  if (w.size() != k || w.minCoeff() <= 0.0) {
    fail(ErrorCode::ValidationError, "weights must be positive, one per integer node");
  }
  AuxSpace aux;
  aux.dim = k;
  aux.weight_matrix = w.asDiagonal();

  std::vector<Index> integer_nodes(k);
  for (Index m = 0; m < k; ++m) integer_nodes[m] = m * nodes_per_unit;

  ChainSetup out;
  out.form = fem_form(fem);
  out.map = validate_trace_map(integer_nodes, aux, out.form);
  out.k = k;
  return out;
}

// Interior-window comparison against a nearest-neighbor stencil
// (diag, off). Entries whose index (or either endpoint, for off-diagonal
// pairs) touches the ends of the window are excluded.
void window_gaps(const Matrix& T, double diag, double off, double* diag_gap,
                 double* offdiag_gap, double* spurious) {
  const Index k = T.rows();
  *diag_gap = 0.0;
  *offdiag_gap = 0.0;
  *spurious = 0.0;
  for (Index m = 1; m + 1 < k; ++m) {
    *diag_gap = std::max(*diag_gap, std::abs(T(m, m) - diag) / std::abs(diag));
  }
  for (Index m = 1; m + 2 < k; ++m) {
    *offdiag_gap = std::max(*offdiag_gap, std::abs(T(m, m + 1) - off) / std::abs(off));
  }
  for (Index r = 0; r < k; ++r) {
    for (Index c = r + 2; c < k; ++c) {
      *spurious = std::max(*spurious, std::abs(T(r, c)));
    }
  }
  *spurious /= std::abs(diag);
}

}  // namespace

ChainDemoResult fem_chain_demo(int L, int nodes_per_unit, double lambda,
                               const Vector& weights) {
  const ChainSetup setup = chain_setup(L, nodes_per_unit, weights);
  ChainDemoResult out;
  out.lambda = lambda;
  out.oracle = chain_coefficients(lambda);
  out.T = trace_form(setup.form, setup.map, lambda, TracePath::schur).T;
  window_gaps(out.T, 2.0 * out.oracle.c_off + out.oracle.c_diag, -out.oracle.c_off,
              &out.diag_gap, &out.offdiag_gap, &out.spurious_fill);
  out.rel_gap = std::max(out.diag_gap, out.offdiag_gap);
  out.pass = out.rel_gap <= 0.01;
  return out;
}

ChainLimitDemoResult fem_chain_limit_demo(int L, int nodes_per_unit,
                                          const Vector& weights) {
  const ChainSetup setup = chain_setup(L, nodes_per_unit, weights);
  const TraceLimitResult lim = trace_limit(setup.form, setup.map, geometric_schedule(),
                                           1e-10);
  ChainLimitDemoResult out;
  out.T0 = lim.T0;
  out.converged = lim.converged;
  double diag_gap = 0.0, off_gap = 0.0, spurious = 0.0;
  window_gaps(out.T0, 2.0, -1.0, &diag_gap, &off_gap, &spurious);
  out.rel_gap = std::max(diag_gap, off_gap);
  out.pass = out.rel_gap <= 0.01;
  return out;
}

double fem_halfstrip_mode(double xi, double lambda, double t_domain, Index N) {
  if (lambda < 0.0 || t_domain <= 0.0 || N < 2) {
    fail(ErrorCode::ValidationError, "invalid half-strip mode parameters");
  }
  const double mu = xi * xi + lambda;
  if (mu <= 0.0) {
    fail(ErrorCode::ValidationError, "mode requires xi^2 + lambda > 0");
  }
  const FemInstance fem = fem_interval(N, 0.0, t_domain);
  const QuadraticForm form = fem_form(fem);
  AuxSpace aux;
  aux.dim = 1;
  aux.weight_matrix = Matrix::Identity(1, 1);
  const TraceMap J = validate_trace_map(std::vector<Index>{0}, aux, form);
  // The mode energy is the shifted form at shift xi^2 + lambda traced onto
  // the left endpoint, evaluated at boundary value 1.
  const TraceForm tf = trace_form(form, J, mu, TracePath::schur);
  return tf.T(0, 0);
}

CounterexampleInstance fem_counterexample(double n, Index N) {
  if (n < 1.0 || N < 16) {
    fail(ErrorCode::ValidationError, "family needs n >= 1 and N >= 16");
  }
  const FemInstance fem = fem_interval(N, 0.0, 1.0);
  CounterexampleInstance out;
  out.n = n;
  out.form.dim = N;
  out.form.form_matrix = fem.A / n;
  out.form.form_matrix(0, 0) += 1.0;
  out.form.form_matrix(N - 1, N - 1) += 1.0;
  out.form.mass_matrix = fem.M;
  AuxSpace aux;
  aux.dim = 2;
  aux.weight_matrix = Matrix::Identity(2, 2);
  out.map = validate_trace_map(std::vector<Index>{0, N - 1}, aux, out.form);
  return out;
}

GridDemoResult grid2d_nested(Index n_outer, Index n_inner) {
  if (n_inner < 3 || n_inner >= n_outer || (n_outer - n_inner) % 2 != 0) {
    fail(ErrorCode::GeometryInvalid,
         "inner box must sit strictly and centrally inside the outer grid");
  }
  const Index offset = (n_outer - n_inner) / 2;
  const Index N = n_outer * n_outer;
  auto id = [n_outer](Index r, Index c) { return r * n_outer + c; };

  // five-point Laplacian, homogeneous Dirichlet just outside the grid
  Matrix A = Matrix::Zero(N, N);
  for (Index r = 0; r < n_outer; ++r) {
    for (Index c = 0; c < n_outer; ++c) {
      const Index i = id(r, c);
      A(i, i) = 4.0;
      if (r > 0) A(i, id(r - 1, c)) = -1.0;
      if (r + 1 < n_outer) A(i, id(r + 1, c)) = -1.0;
      if (c > 0) A(i, id(r, c - 1)) = -1.0;
      if (c + 1 < n_outer) A(i, id(r, c + 1)) = -1.0;
    }
  }
  QuadraticForm form;
  form.dim = N;
  form.form_matrix = std::move(A);
  form.mass_matrix = Matrix::Identity(N, N);

  const Index k = n_inner * n_inner;
  std::vector<Index> box(k);
  for (Index br = 0; br < n_inner; ++br)
    for (Index bc = 0; bc < n_inner; ++bc)
      box[br * n_inner + bc] = id(offset + br, offset + bc);
  AuxSpace aux;
  aux.dim = k;
  aux.weight_matrix = Matrix::Identity(k, k);
  const TraceMap J = validate_trace_map(box, aux, form);

  const TraceLimitResult lim = trace_limit(form, J, geometric_schedule(), 1e-13);

  GridDemoResult out;
  out.T0 = lim.T0;
  for (Index br = 0; br < n_inner; ++br) {
    for (Index bc = 0; bc < n_inner; ++bc) {
      const Index b = br * n_inner + bc;
      Vector expected = Vector::Zero(k);
      for (Index j = 0; j < k; ++j) expected[j] = form.form_matrix(box[b], box[j]);
      const double dev = (out.T0.row(b).transpose() - expected).cwiseAbs().maxCoeff();
      const bool ring = br == 0 || bc == 0 || br == n_inner - 1 || bc == n_inner - 1;
      if (ring) {
        out.interface_row_max_dev = std::max(out.interface_row_max_dev, dev);
      } else {
        out.interior_row_gap = std::max(out.interior_row_gap, dev);
        ++out.interior_rows;
      }
    }
  }

  // quarter turn of the box: (br, bc) -> (bc, n_inner - 1 - br)
  Matrix rotated(k, k);
  auto rot = [n_inner](Index b) {
    const Index br = b / n_inner;
    const Index bc = b % n_inner;
    return bc * n_inner + (n_inner - 1 - br);
  };
  for (Index r = 0; r < k; ++r)
    for (Index c = 0; c < k; ++c) rotated(rot(r), rot(c)) = out.T0(r, c);
  out.rotation_gap = (rotated - out.T0).cwiseAbs().maxCoeff();

  out.pass = out.interior_row_gap <= 1e-10 && out.rotation_gap <= 1e-10;
  return out;
}

}  // namespace traceforms
