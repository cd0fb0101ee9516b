#include "traceforms/mosco.hpp"

#include "traceforms/instances.hpp"
#include "traceforms/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace traceforms {

namespace {

// least-squares slope of log(y) against log(x), skipping nonpositive y
bool loglog_slope(const std::vector<double>& x, const std::vector<double>& y,
                  double* slope) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] > 1e-300 && x[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return false;
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) return false;
  *slope = (n * sxy - sx * sy) / denom;
  return true;
}

Matrix unit_resolvent(const Matrix& A, const Matrix& M) {
  // (M^{-1} A + 1)^{-1} = (A + M)^{-1} M
  Eigen::LLT<Matrix> llt(symmetric_part(A + M));
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::Singular, "unit-shifted matrix not positive definite");
  }
  return llt.solve(M);
}

QuadraticForm with_form_matrix(const QuadraticForm& base, const Matrix& A) {
  QuadraticForm out = base;
  out.form_matrix = A;
  return out;
}

}  // namespace

FormSequence make_form_sequence(const Matrix& mass, const std::vector<Matrix>& terms,
                                const Matrix& limit, const Matrix& reference,
                                const TraceMap& map, std::vector<double> n_values) {
  if (terms.empty()) {
    fail(ErrorCode::ValidationError, "form sequence needs at least one term");
  }
  FormSequence out;
  out.terms.reserve(terms.size());
  for (const Matrix& A : terms) out.terms.push_back(validate_form(A, mass));
  out.limit = validate_form(limit, mass);
  out.reference = validate_form(reference, mass);
  out.map = map;
  if (map.ground_dim() != out.limit.dim) {
    fail(ErrorCode::ValidationError, "trace map does not match the shared dimension");
  }
  if (n_values.empty()) {
    for (std::size_t i = 0; i < terms.size(); ++i)
      out.n_values.push_back(static_cast<double>(i + 1));
  } else if (n_values.size() != terms.size()) {
    fail(ErrorCode::ValidationError, "one n label per term required");
  } else {
    out.n_values = std::move(n_values);
  }
  return out;
}

ComparabilityReport comparability_constant(const FormSequence& seq) {
  const Matrix& R = seq.reference.form_matrix;
  Eigen::SelfAdjointEigenSolver<Matrix> es(R);
  const Vector evals = es.eigenvalues();
  const double emax = std::max(evals.cwiseAbs().maxCoeff(), 1e-300);

  Index null_dim = 0;
  while (null_dim < evals.size() && evals[null_dim] <= 1e-12 * emax) ++null_dim;
  const Matrix Z = es.eigenvectors().leftCols(null_dim);
  Matrix Qs = es.eigenvectors().rightCols(evals.size() - null_dim);
  for (Index c = 0; c < Qs.cols(); ++c) Qs.col(c) /= std::sqrt(evals[null_dim + c]);

  ComparabilityReport out;
  if (Qs.cols() == 0) {
    out.infinite = true;
    out.c = std::numeric_limits<double>::infinity();
    out.reason = "reference form vanishes identically";
    return out;
  }
  auto account = [&](const Matrix& A, const std::string& label) {
    const double a_scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
    if (null_dim > 0 && (A * Z).cwiseAbs().maxCoeff() > 1e-10 * a_scale) {
      out.infinite = true;
      if (out.reason.empty()) {
        out.reason = label + " does not vanish on the reference kernel";
      }
      out.per_term.push_back(std::numeric_limits<double>::infinity());
      return;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> pe(symmetric_part(Qs.transpose() * A * Qs),
                                             Eigen::EigenvaluesOnly);
    const double lo = pe.eigenvalues().minCoeff();
    const double hi = pe.eigenvalues().maxCoeff();
    if (lo <= 1e-14 * std::max(hi, 1e-300)) {
      out.infinite = true;
      if (out.reason.empty()) {
        out.reason = label + " degenerates on the reference support";
      }
      out.per_term.push_back(std::numeric_limits<double>::infinity());
      return;
    }
    const double c_n = std::max({hi, 1.0 / lo, 1.0});
    out.per_term.push_back(c_n);
    out.c = std::max(out.c, c_n);
  };

  for (std::size_t i = 0; i < seq.terms.size(); ++i) {
    std::ostringstream label;
    label << "term " << i;
    account(seq.terms[i].form_matrix, label.str());
  }
  account(seq.limit.form_matrix, "limit");
  if (out.infinite) out.c = std::numeric_limits<double>::infinity();
  return out;
}

double trace_map_norm(const QuadraticForm& form, const TraceMap& J) {
  const Matrix Jd = J.matrix();
  const Matrix JtWJ = symmetric_part(Jd.transpose() * J.aux().weight_matrix * Jd);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(
      JtWJ, symmetric_part(form.form_matrix + form.mass_matrix));
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

ResolventTraceReport resolvent_trace_residuals(const FormSequence& seq,
                                               int test_vectors, std::uint64_t seed) {
  const Index n = seq.limit.dim;
  const Matrix& M = seq.limit.mass_matrix;
  const Matrix& W = seq.map.aux().weight_matrix;

  auto rng = make_rng(seed);
  std::vector<Vector> us;
  for (int t = 0; t < test_vectors; ++t) us.push_back(random_vector(n, rng));

  Eigen::LLT<Matrix> llt_inf(symmetric_part(seq.limit.form_matrix + M));
  ResolventTraceReport out;
  std::vector<Vector> k_inf_u;
  for (const Vector& u : us) k_inf_u.push_back(llt_inf.solve(M * u));

  for (const QuadraticForm& term : seq.terms) {
    Eigen::LLT<Matrix> llt_n(symmetric_part(term.form_matrix + M));
    double resid = 0.0;
    double egap = 0.0;
    for (std::size_t t = 0; t < us.size(); ++t) {
      const Vector kn = llt_n.solve(M * us[t]);
      const Vector d = seq.map.apply(kn - k_inf_u[t]);
      resid = std::max(resid, std::sqrt(std::abs(d.dot(W * d))));
      const Vector& v = k_inf_u[t];
      egap = std::max(egap, std::abs(v.dot(term.form_matrix * v) -
                                     v.dot(seq.limit.form_matrix * v)));
    }
    out.residuals.push_back(resid);
    out.energy_gaps.push_back(egap);
  }
  out.slope_valid = loglog_slope(seq.n_values, out.residuals, &out.slope);
  return out;
}

double mosco_distance(const Matrix& A1, const Matrix& A2, const Matrix& M) {
  if (A1.rows() != A2.rows() || A1.rows() != M.rows()) {
    fail(ErrorCode::ValidationError, "distance needs matching dimensions");
  }
  Eigen::LLT<Matrix> lltM(symmetric_part(M));
  if (lltM.info() != Eigen::Success) {
    fail(ErrorCode::MassNotPD, "mass matrix not positive definite");
  }
  const Matrix delta = unit_resolvent(A1, M) - unit_resolvent(A2, M);
  const Matrix L = lltM.matrixL();
  return spectral_norm_sym(symmetric_part(L.transpose() * delta * L));
}

namespace {

/// W-operator norm of W^{-1} (Q1 - Q2), the operator associated with the
/// form gap on the auxiliary space.
double aux_form_gap(const Matrix& Q1, const Matrix& Q2, const Matrix& W) {
  Eigen::LLT<Matrix> llt(symmetric_part(W));
  const Matrix L = llt.matrixL();
  const Matrix D = Q1 - Q2;
  const Matrix S = L.triangularView<Eigen::Lower>().solve(
      Matrix(L.triangularView<Eigen::Lower>().solve(D.transpose()).transpose()));
  return spectral_norm_sym(symmetric_part(S));
}

Matrix bounded_resolvent_form(const QuadraticForm& term, const TraceMap& J,
                              double lambda) {
  // W J (A + lambda M)^{-1} J^T W
  const Matrix Jd = J.matrix();
  const Matrix& W = J.aux().weight_matrix;
  Eigen::LLT<Matrix> llt(
      symmetric_part(term.form_matrix + lambda * term.mass_matrix));
  if (llt.info() != Eigen::Success) {
    fail(ErrorCode::Singular, "shifted matrix not positive definite");
  }
  return symmetric_part(W * (Jd * llt.solve(Jd.transpose() * W)));
}

}  // namespace

MoscoReport trace_convergence_run(const FormSequence& seq, double lambda,
                                  double tol_run) {
  MoscoReport out;
  const ComparabilityReport comp = comparability_constant(seq);
  if (comp.infinite) {
    out.warnings.push_back("comparability constant infinite: " + comp.reason);
  }
  const ResolventTraceReport rt = resolvent_trace_residuals(seq, 10, 20240);
  if (!rt.residuals.empty() && rt.residuals.back() > 10 * tol_run &&
      rt.residuals.back() > 0.5 * rt.residuals.front()) {
    out.warnings.push_back("traced resolvents do not approach the declared limit");
  }

  const Matrix& W = seq.map.aux().weight_matrix;
  const TraceForm t_inf = trace_form(seq.limit, seq.map, lambda,
                                     auto_trace_path(seq.map));
  const Matrix q_inf = bounded_resolvent_form(seq.limit, seq.map, lambda);

  const Index count = static_cast<Index>(seq.terms.size());
  out.distances.resize(count);
  out.q_form_gaps.resize(count);
  parallel_for(count, [&](Index i) {
    const TraceForm t_n = trace_form(seq.terms[i], seq.map, lambda,
                                     auto_trace_path(seq.map));
    out.distances[i] = mosco_distance(t_n.T, t_inf.T, W);
    out.q_form_gaps[i] =
        aux_form_gap(bounded_resolvent_form(seq.terms[i], seq.map, lambda), q_inf, W);
  });

  out.slope_valid = loglog_slope(seq.n_values, out.distances, &out.slope);
  out.final_distance = out.distances.empty() ? 0.0 : out.distances.back();
  out.pass = out.final_distance <= tol_run;
  return out;
}

DiagonalResult diagonal_select(const FormSequence& seq,
                               const std::vector<double>& lambdas,
                               const std::vector<double>& epsilons) {
  if (lambdas.size() != epsilons.size() || lambdas.empty()) {
    fail(ErrorCode::ValidationError, "matched shift and tolerance schedules required");
  }
  for (std::size_t j = 1; j < lambdas.size(); ++j) {
    if (lambdas[j] >= lambdas[j - 1]) {
      fail(ErrorCode::ValidationError, "shift schedule must decrease strictly");
    }
  }
  const Matrix& W = seq.map.aux().weight_matrix;
  const TraceLimitResult limit_trace = trace_limit(seq.limit, seq.map);

  DiagonalResult out;
  Index next = 0;
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const TraceForm t_inf = trace_form(seq.limit, seq.map, lambdas[j],
                                       auto_trace_path(seq.map));
    bool found = false;
    for (Index cand = next; cand < static_cast<Index>(seq.terms.size()); ++cand) {
      const TraceForm t_n = trace_form(seq.terms[cand], seq.map, lambdas[j],
                                       auto_trace_path(seq.map));
      if (mosco_distance(t_n.T, t_inf.T, W) <= epsilons[j]) {
        out.pairs.emplace_back(lambdas[j], cand);
        out.distances_to_limit.push_back(mosco_distance(t_n.T, limit_trace.T0, W));
        next = cand + 1;
        found = true;
        break;
      }
    }
    if (!found) {
      std::ostringstream os;
      os << "no term within " << epsilons[j] << " of the limit trace at shift "
         << lambdas[j];
      fail(ErrorCode::ScheduleExhausted, os.str());
    }
  }
  return out;
}

FormSequence counterexample_sequence(const std::vector<double>& n_values, Index N,
                                     CounterexampleLimit declared) {
  if (n_values.empty()) {
    fail(ErrorCode::ValidationError, "at least one family member required");
  }
  const FemInstance fem = fem_interval(N, 0.0, 1.0);

  FormSequence out;
  for (double n : n_values) {
    out.terms.push_back(fem_counterexample(n, N).form);
  }
  out.n_values = n_values;

  Matrix limit = Matrix::Zero(N, N);
  if (declared == CounterexampleLimit::entrywise) {
    limit(0, 0) = 1.0;
    limit(N - 1, N - 1) = 1.0;
  }
  out.limit = with_form_matrix(out.terms.front(), limit);
  out.reference = with_form_matrix(out.terms.front(), fem.A);

  AuxSpace aux;
  aux.dim = 2;
  aux.weight_matrix = Matrix::Identity(2, 2);
  out.map = validate_trace_map(std::vector<Index>{0, N - 1}, aux, out.limit);
  return out;
}

}  // namespace traceforms
