#include "traceforms/io.hpp"

#include "traceforms/instances.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace traceforms {

namespace {

constexpr Index kCooDenseLimit = 4096;

[[noreturn]] void schema_error(const std::string& field, const std::string& what) {
  fail(ErrorCode::ParseError, "field '" + field + "': " + what);
}

void require_keys(const Json& doc, const std::set<std::string>& required,
                  const std::set<std::string>& optional) {
  if (!doc.is_object()) {
    fail(ErrorCode::ParseError, "document root must be an object");
  }
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (!required.count(key) && !optional.count(key)) {
      fail(ErrorCode::ParseError, "unknown top-level key '" + key + "'");
    }
  }
  for (const std::string& key : required) {
    if (!doc.contains(key)) {
      fail(ErrorCode::ParseError, "missing required key '" + key + "'");
    }
  }
}

bool looks_like_coo(const Json& j) {
  return j.is_array() && !j.empty() && j.front().is_object();
}

Matrix coo_to_dense(const Json& j, Index rows, Index cols, const std::string& field) {
  if (rows > kCooDenseLimit || cols > kCooDenseLimit) {
    std::ostringstream os;
    os << "coordinate input for '" << field << "' refused at dimension " << rows << "x"
       << cols << " (limit " << kCooDenseLimit << ")";
    fail(ErrorCode::SizeLimit, os.str());
  }
  Matrix out = Matrix::Zero(rows, cols);
  for (const Json& entry : j) {
    if (!entry.is_object() || !entry.contains("i") || !entry.contains("j") ||
        !entry.contains("v")) {
      schema_error(field, "coordinate entries need keys i, j, v");
    }
    const Index r = entry.at("i").get<Index>();
    const Index c = entry.at("j").get<Index>();
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      schema_error(field, "coordinate index out of range");
    }
    out(r, c) += entry.at("v").get<double>();  // duplicates sum
  }
  return out;
}

Matrix dense_from_json(const Json& j, Index rows, Index cols, const std::string& field) {
  if (j.is_array() && !j.empty() && j.front().is_array()) {
    if (static_cast<Index>(j.size()) != rows) {
      schema_error(field, "row count mismatch");
    }
    Matrix out(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      const Json& row = j[static_cast<std::size_t>(r)];
      if (static_cast<Index>(row.size()) != cols) {
        schema_error(field, "column count mismatch");
      }
      for (Index c = 0; c < cols; ++c) out(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return out;
  }
  if (j.is_array()) {
    if (static_cast<Index>(j.size()) != rows * cols) {
      schema_error(field, "flat array length must be rows*cols");
    }
    Matrix out(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c)
        out(r, c) = j[static_cast<std::size_t>(r * cols + c)].get<double>();
    return out;
  }
  schema_error(field, "expected a dense array or coordinate triplets");
}

Matrix square_matrix_from_json(const Json& j, Index dim, const std::string& field) {
  if (looks_like_coo(j)) return coo_to_dense(j, dim, dim, field);
  if (j.is_array() && j.empty()) schema_error(field, "empty matrix");
  return dense_from_json(j, dim, dim, field);
}

Matrix mass_like_from_json(const Json& j, Index dim, const std::string& field) {
  if (j.is_string()) {
    if (j.get<std::string>() == "identity") return Matrix::Identity(dim, dim);
    schema_error(field, "unknown shorthand '" + j.get<std::string>() + "'");
  }
  if (j.is_object() && j.contains("diag")) {
    const Json& d = j.at("diag");
    if (!d.is_array() || static_cast<Index>(d.size()) != dim) {
      schema_error(field, "diag needs one entry per dimension");
    }
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v[i] = d[static_cast<std::size_t>(i)].get<double>();
    return v.asDiagonal();
  }
  return square_matrix_from_json(j, dim, field);
}

template <typename Fn>
auto forward_validation(const std::string& field, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError || e.code() == ErrorCode::SizeLimit) throw;
    throw Error(e.code(), std::string("field '") + field + "': " + e.what());
  }
}

struct ParsedTraceMap {
  bool restriction = false;
  std::vector<Index> indices;
  Matrix dense;
  Index aux_dim = 0;
};

ParsedTraceMap trace_map_from_json(const Json& j, Index dim) {
  ParsedTraceMap out;
  if (j.is_object() && j.contains("restrict")) {
    const Json& idx = j.at("restrict");
    if (!idx.is_array() || idx.empty()) schema_error("J", "restrict needs an index list");
    for (const Json& e : idx) out.indices.push_back(e.get<Index>());
    out.restriction = true;
    out.aux_dim = static_cast<Index>(out.indices.size());
    return out;
  }
  if (looks_like_coo(j)) {
    Index rows = 0;
    for (const Json& entry : j) {
      if (entry.is_object() && entry.contains("i")) {
        rows = std::max(rows, entry.at("i").get<Index>() + 1);
      }
    }
    if (rows == 0) schema_error("J", "cannot infer row count from coordinates");
    out.dense = coo_to_dense(j, rows, dim, "J");
    out.aux_dim = rows;
    return out;
  }
  if (j.is_array() && !j.empty() && j.front().is_array()) {
    const Index rows = static_cast<Index>(j.size());
    out.dense = dense_from_json(j, rows, dim, "J");
    out.aux_dim = rows;
    return out;
  }
  schema_error("J", "expected nested rows, coordinate triplets, or {\"restrict\": [...]}");
}

Json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::IoError, "cannot open '" + path + "'");
  }
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string(e.what()) + " in '" + path + "'");
  }
}

}  // namespace

FormSpec parse_form_spec_json(const Json& doc) {
  require_keys(doc, {"dim", "A", "M", "J", "W"}, {});
  const Index dim = doc.at("dim").get<Index>();
  if (dim <= 0) schema_error("dim", "must be positive");

  const Matrix A = square_matrix_from_json(doc.at("A"), dim, "A");
  const Matrix M = mass_like_from_json(doc.at("M"), dim, "M");
  FormSpec out;
  out.form = forward_validation("A/M", [&] { return validate_form(A, M); });

  const ParsedTraceMap pj = trace_map_from_json(doc.at("J"), dim);
  const Matrix W = mass_like_from_json(doc.at("W"), pj.aux_dim, "W");
  const AuxSpace aux =
      forward_validation("W", [&] { return validate_aux_space(W); });
  out.map = forward_validation("J", [&] {
    return pj.restriction ? validate_trace_map(pj.indices, aux, out.form)
                          : validate_trace_map(pj.dense, aux, out.form);
  });
  return out;
}

FormSpec parse_form_spec(const std::string& path) {
  return parse_form_spec_json(parse_file(path));
}

FormSequence parse_sequence_spec_json(const Json& doc) {
  require_keys(doc, {"dim", "M", "A_list", "A_inf", "J", "W", "reference_A"},
               {"n_values"});
  const Index dim = doc.at("dim").get<Index>();
  if (dim <= 0) schema_error("dim", "must be positive");

  const Matrix M = mass_like_from_json(doc.at("M"), dim, "M");
  const Json& list = doc.at("A_list");
  if (!list.is_array() || list.empty()) schema_error("A_list", "needs at least one matrix");
  std::vector<Matrix> terms;
  for (std::size_t i = 0; i < list.size(); ++i) {
    terms.push_back(square_matrix_from_json(list[i], dim, "A_list"));
  }
  const Matrix A_inf = square_matrix_from_json(doc.at("A_inf"), dim, "A_inf");
  const Matrix A_ref = square_matrix_from_json(doc.at("reference_A"), dim, "reference_A");

  const ParsedTraceMap pj = trace_map_from_json(doc.at("J"), dim);
  const Matrix W = mass_like_from_json(doc.at("W"), pj.aux_dim, "W");
  const AuxSpace aux = forward_validation("W", [&] { return validate_aux_space(W); });

  QuadraticForm probe = forward_validation(
      "A_inf/M", [&] { return validate_form(A_inf, M); });
  const TraceMap map = forward_validation("J", [&] {
    return pj.restriction ? validate_trace_map(pj.indices, aux, probe)
                          : validate_trace_map(pj.dense, aux, probe);
  });

  std::vector<double> n_values;
  if (doc.contains("n_values")) {
    for (const Json& e : doc.at("n_values")) n_values.push_back(e.get<double>());
  }
  return forward_validation("A_list", [&] {
    return make_form_sequence(M, terms, A_inf, A_ref, map, n_values);
  });
}

FormSequence parse_sequence_spec(const std::string& path) {
  return parse_sequence_spec_json(parse_file(path));
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    fail(ErrorCode::ParseError, "expected nested matrix rows");
  }
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j.front().size());
  return dense_from_json(j, rows, cols, "matrix");
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  fail(ErrorCode::ValidationError, "unknown report format '" + name + "'");
}

void emit_report(const Json& report, const std::string& path, ReportFormat format,
                 const std::string& csv_field) {
  if (format == ReportFormat::json) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
    out << report.dump(2) << '\n';
    if (!out) fail(ErrorCode::IoError, "write failed for '" + path + "'");
    return;
  }

  std::string field = csv_field;
  if (field.empty()) {
    for (const char* cand : {"T", "T0", "operator", "e_har_form"}) {
      if (report.contains(cand)) {
        field = cand;
        break;
      }
    }
  }
  if (field.empty() || !report.contains(field)) {
    fail(ErrorCode::IoError, "no matrix field available for csv output");
  }
  const Matrix m = matrix_from_json(report.at(field));
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << "i,j,value\n";
  char buf[64];
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%" PRId64 ",%" PRId64 ",%.17g\n",
                    static_cast<std::int64_t>(r), static_cast<std::int64_t>(c), m(r, c));
      out << buf;
    }
  }
  if (!out) fail(ErrorCode::IoError, "write failed for '" + path + "'");
}

Json report_json(const TraceForm& tf) {
  Json residuals = Json::object();
  for (const auto& [key, value] : tf.residuals) residuals[key] = value;
  return Json{{"lambda", tf.lambda},
              {"T", matrix_to_json(tf.T)},
              {"operator", matrix_to_json(tf.operator_matrix)},
              {"path", trace_path_name(tf.path)},
              {"residuals", residuals}};
}

Json report_json(const TraceLimitResult& lim) {
  Json schedule = Json::array();
  for (const TraceLimitStep& step : lim.schedule) {
    schedule.push_back(Json{{"lambda", step.lambda}, {"decrement", step.decrement}});
  }
  Json out{{"T0", matrix_to_json(lim.T0)},
           {"operator", matrix_to_json(lim.operator_matrix)},
           {"schedule", schedule},
           {"converged", lim.converged}};
  if (lim.exact_available) {
    out["exact_gap"] = lim.exact_gap;
  }
  return out;
}

Json report_json(const MarkovReport& rep) {
  return Json{{"alpha_list", rep.alpha_list},
              {"max_box_violation", rep.max_box_violation},
              {"structural",
               Json{{"offdiag_max", rep.structural.offdiag_max},
                    {"rowsum_min", rep.structural.rowsum_min}}},
              {"pass", rep.pass}};
}

Json report_json(const MoscoReport& rep) {
  Json diagonal = Json::array();
  for (const auto& [lambda, n] : rep.diagonal) {
    diagonal.push_back(Json{{"lambda", lambda}, {"n", n}});
  }
  Json out{{"distances", rep.distances},
           {"q_form_gaps", rep.q_form_gaps},
           {"diagonal", diagonal},
           {"final_distance", rep.final_distance},
           {"pass", rep.pass},
           {"warnings", rep.warnings}};
  if (rep.slope_valid) out["slope"] = rep.slope;
  return out;
}

Json report_json(const ShiftConsistencyReport& rep) {
  return Json{{"beta", rep.beta}, {"deviation", rep.deviation}, {"pass", rep.pass}};
}

Json harmonic_report_json(const QuadraticForm& form, const TraceMap& map,
                          std::uint64_t seed) {
  const HarmonicDecomposition H = harmonic_decomposition(form, map);
  Json out;
  out["direct_sum_ok"] = H.direct_sum_ok;
  const EllipticityResult ell = ellipticity_scan(form, map);
  out["elliptic"] =
      Json{{"flag", ell.elliptic}, {"alpha", ell.alpha_best}, {"beta", ell.beta_best}};
  if (!H.direct_sum_ok) return out;

  out["e_har_form"] = matrix_to_json(harmonic_form(H, form, map));
  out["quadharm_residual"] =
      extension_symmetry_check(H, form, map, 50, seed).max_deviation;

  const DirichletPart D = dirichlet_part(form, map);
  double spread = 0.0;
  auto rng = make_rng(seed);
  for (int t = 0; t < 5; ++t) {
    const Vector u = random_vector(form.dim, rng);
    const Vector v1 = harmonic_lift(form, map, D, u, 1.0);
    for (double lambda : {0.1, 0.5, 2.0}) {
      spread = std::max(
          (harmonic_lift(form, map, D, u, lambda) - v1).norm(), spread);
    }
  }
  out["v_lambda_spread"] = spread;
  return out;
}

}  // namespace traceforms
