#pragma once

#include "traceforms/harmonic.hpp"
#include "traceforms/markov.hpp"
#include "traceforms/mosco.hpp"
#include "traceforms/trace_engine.hpp"

#include <json.hpp>

#include <string>

namespace traceforms {

using Json = nlohmann::json;

/// Parsed problem description: the ground form plus the trace map (with its
/// auxiliary space).
struct FormSpec {
  QuadraticForm form;
  TraceMap map;
};

/// Form-spec document: {dim, A, M, J, W} with
///   A: nested rows, flat row-major array, or COO triplets [{i,j,v}, ...]
///   M: same encodings, or "identity"
///   J: nested rows, COO triplets, or {"restrict": [indices]}
///   W: same as M, or {"diag": [...]}
/// Indices are 0-based; COO duplicates are summed; unknown top-level keys are
/// rejected. COO ingestion refuses dimensions above 4096.
FormSpec parse_form_spec_json(const Json& doc);
FormSpec parse_form_spec(const std::string& path);

/// Sequence document: {dim, M, A_list, A_inf, J, W, reference_A} plus an
/// optional n_values array of labels.
FormSequence parse_sequence_spec_json(const Json& doc);
FormSequence parse_sequence_spec(const std::string& path);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

enum class ReportFormat { json, csv };
ReportFormat parse_report_format(const std::string& name);

/// Writes a report deterministically. CSV output flattens one matrix field
/// row-major under the header i,j,value; `csv_field` picks it (empty selects
/// the first of T, T0, operator, e_har_form present in the report).
void emit_report(const Json& report, const std::string& path, ReportFormat format,
                 const std::string& csv_field = "");

// report builders
Json report_json(const TraceForm& tf);
Json report_json(const TraceLimitResult& lim);
Json report_json(const MarkovReport& rep);
Json report_json(const MoscoReport& rep);
Json report_json(const ShiftConsistencyReport& rep);

/// Harmonic-analysis summary for one problem: splitting flag, the reduced
/// harmonic form, symmetry residual, lift spread over a shift sample, and
/// the coercivity certificate.
Json harmonic_report_json(const QuadraticForm& form, const TraceMap& map,
                          std::uint64_t seed);

}  // namespace traceforms
