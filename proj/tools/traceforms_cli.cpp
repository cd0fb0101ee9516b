#include "traceforms/acceptance.hpp"
#include "traceforms/harmonic.hpp"
#include "traceforms/io.hpp"
#include "traceforms/markov.hpp"
#include "traceforms/mosco.hpp"
#include "traceforms/oracles.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

using namespace traceforms;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitCriterion = 4;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSymmetric:
    case ErrorCode::NotPSD:
    case ErrorCode::MassNotPD:
    case ErrorCode::RankDeficient:
    case ErrorCode::SizeLimit:
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::IoError:
      return kExitParse;
    default:
      return kExitNumerical;
  }
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) fail(ErrorCode::ValidationError, "empty numeric list '" + text + "'");
  return out;
}

// "geometric:start:ratio:count" or an explicit comma-separated list
std::vector<double> parse_schedule(const std::string& text) {
  if (text.rfind("geometric:", 0) == 0) {
    std::stringstream ss(text.substr(10));
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c)) {
      fail(ErrorCode::ValidationError,
           "schedule syntax: geometric:<start>:<ratio>:<count> or a comma list");
    }
    return geometric_schedule(std::stod(a), std::stod(b), std::stoi(c));
  }
  return parse_double_list(text);
}

void deliver(const Json& report, const std::string& out_path, const std::string& format) {
  if (out_path.empty()) {
    std::cout << report.dump(2) << '\n';
    return;
  }
  emit_report(report, out_path, parse_report_format(format));
}

struct CommonOpts {
  std::string form_path;
  std::string out_path;
  std::string format = "json";
  double lambda = 1.0;
  std::uint64_t seed = 42;
};

int run_trace(const CommonOpts& opts, const std::string& path_name) {
  const FormSpec spec = parse_form_spec(opts.form_path);
  const TracePath path =
      path_name == "auto" ? auto_trace_path(spec.map) : parse_trace_path(path_name);
  const TraceForm tf = trace_form(spec.form, spec.map, opts.lambda, path);
  deliver(report_json(tf), opts.out_path, opts.format);
  return kExitOk;
}

int run_limit(const CommonOpts& opts, const std::string& schedule_text, double tol) {
  const FormSpec spec = parse_form_spec(opts.form_path);
  const TraceLimitResult lim =
      trace_limit(spec.form, spec.map, parse_schedule(schedule_text), tol);
  deliver(report_json(lim), opts.out_path, opts.format);
  return kExitOk;
}

int run_harmonic(const CommonOpts& opts) {
  const FormSpec spec = parse_form_spec(opts.form_path);
  deliver(harmonic_report_json(spec.form, spec.map, opts.seed), opts.out_path,
          opts.format);
  return kExitOk;
}

int run_dirichlet_check(const CommonOpts& opts, const std::string& alphas_text,
                        int samples) {
  const FormSpec spec = parse_form_spec(opts.form_path);
  const TraceForm tf =
      trace_form(spec.form, spec.map, opts.lambda, auto_trace_path(spec.map));
  const MarkovReport rep = markov_resolvent_check(
      tf.T, spec.map.aux().weight_matrix, parse_double_list(alphas_text), samples,
      opts.seed);
  Json j = report_json(rep);
  j["lambda"] = opts.lambda;
  deliver(j, opts.out_path, opts.format);
  return rep.pass ? kExitOk : kExitCriterion;
}

int run_mosco_sequence(const CommonOpts& opts, const std::string& sequence_path,
                       double tol_run) {
  const FormSequence seq = parse_sequence_spec(sequence_path);
  const MoscoReport rep = trace_convergence_run(seq, opts.lambda, tol_run);
  Json j = report_json(rep);
  const ComparabilityReport comp = comparability_constant(seq);
  j["comparability"] = comp.infinite ? Json("infinite") : Json(comp.c);
  j["trace_map_norm"] = trace_map_norm(seq.reference, seq.map);
  deliver(j, opts.out_path, opts.format);
  return kExitOk;
}

int run_mosco_counterexample(const CommonOpts& opts, const std::string& n_text,
                             Index fem_nodes) {
  const std::vector<double> ns = parse_double_list(n_text);
  const FormSequence seq =
      counterexample_sequence(ns, fem_nodes, CounterexampleLimit::zero_form);
  const MoscoReport rep = trace_convergence_run(seq, opts.lambda);
  Json j = report_json(rep);
  j["comparability"] = "infinite";

  Json formula_gaps = Json::array();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const TraceForm tf =
        trace_form(seq.terms[i], seq.map, opts.lambda, TracePath::schur);
    Vector e1(2);
    e1 << 1, 0;
    const double oracle = counterexample_value(ns[i], opts.lambda, 1, 0);
    formula_gaps.push_back(Json{
        {"n", ns[i]},
        {"computed", e1.dot(tf.T * e1)},
        {"oracle", oracle},
        {"rel_gap", std::abs(e1.dot(tf.T * e1) - oracle) / std::abs(oracle)}});
  }
  j["formula_check"] = formula_gaps;

  bool exhausted = false;
  try {
    diagonal_select(seq, {0.5, 0.25, 0.125}, {0.5, 0.25, 0.125});
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ScheduleExhausted) throw;
    exhausted = true;
  }
  j["diagonal_exhausted"] = exhausted;
  deliver(j, opts.out_path, opts.format);
  return kExitOk;
}

int run_selftest(const std::string& filter) {
  const auto results = run_acceptance(filter);
  if (results.empty()) {
    std::cerr << "no criteria match filter '" << filter << "'\n";
    return kExitParse;
  }
  const int failures = print_acceptance_table(results, std::cout);
  return failures == 0 ? kExitOk : kExitCriterion;
}

Json comparison_report(double computed, double oracle, double rel_tol) {
  const double gap = std::abs(computed - oracle) / std::max(std::abs(oracle), 1e-300);
  return Json{{"computed", computed},
              {"oracle", oracle},
              {"rel_gap", gap},
              {"pass", gap <= rel_tol}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trace reductions of positive quadratic forms"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string path_name = "auto";
  std::string schedule_text = "geometric:1:0.5:40";
  std::string alphas_text = "0.5,1,2";
  std::string sequence_path;
  std::string n_text = "1,4,16,64";
  std::string filter;
  std::string which;
  double tol = 1e-8;
  double xi = 1.0;
  double param_a = 1.0;
  double param_b = 0.0;
  double domain = 20.0;
  Index nodes = 2048;
  Index fem_nodes = 512;
  Index outer = 33;
  Index inner = 11;
  int chain_L = 8;
  int chain_npu = 64;
  double family_n = 4.0;
  int samples = 500;

  auto add_common = [&](CLI::App* cmd, bool needs_form) {
    if (needs_form) {
      cmd->add_option("--form", opts.form_path, "form-spec JSON file")->required();
    }
    cmd->add_option("--out", opts.out_path, "output path (stdout when omitted)");
    cmd->add_option("--format", opts.format, "json|csv");
    cmd->add_option("--seed", opts.seed, "sampling seed");
  };

  CLI::App* trace_cmd = app.add_subcommand("trace", "reduced form at a fixed shift");
  add_common(trace_cmd, true);
  trace_cmd->add_option("--lambda", opts.lambda, "shift (> 0)");
  trace_cmd->add_option("--path", path_name, "schur|kkt|adjoint|auto");

  CLI::App* limit_cmd = app.add_subcommand("limit", "zero-shift limit of the reduced forms");
  add_common(limit_cmd, true);
  limit_cmd->add_option("--schedule", schedule_text,
                        "geometric:<start>:<ratio>:<count> or comma list");
  limit_cmd->add_option("--tol", tol, "relative decrement declaring convergence");

  CLI::App* harm_cmd = app.add_subcommand("harmonic", "harmonic splitting summary");
  add_common(harm_cmd, true);

  CLI::App* dc_cmd = app.add_subcommand("dirichlet-check", "Markov box test of the reduction");
  add_common(dc_cmd, true);
  dc_cmd->add_option("--lambda", opts.lambda, "shift (> 0)");
  dc_cmd->add_option("--alphas", alphas_text, "comma list of resolvent parameters");
  dc_cmd->add_option("--samples", samples, "random samples per parameter");

  CLI::App* mosco_cmd = app.add_subcommand("mosco", "form-sequence convergence harness");
  add_common(mosco_cmd, false);
  mosco_cmd->add_option("--sequence", sequence_path, "sequence JSON file");
  mosco_cmd->add_option("--lambda", opts.lambda, "shift (> 0)");
  mosco_cmd->add_option("--tol", tol, "final-distance pass threshold");
  std::string mosco_demo;
  mosco_cmd->add_option("--demo", mosco_demo, "counterexample");
  mosco_cmd->add_option("--n", n_text, "family indices for the demo");
  mosco_cmd->add_option("--fem", fem_nodes, "mesh nodes for the demo");

  CLI::App* oracle_cmd = app.add_subcommand("oracle", "closed-form reference values");
  oracle_cmd->add_option("which", which, "chain|halfspace|counterexample")->required();
  add_common(oracle_cmd, false);
  oracle_cmd->add_option("--lambda", opts.lambda, "shift");
  oracle_cmd->add_option("--xi", xi, "frequency");
  oracle_cmd->add_option("--n", family_n, "family index");
  oracle_cmd->add_option("--a", param_a, "boundary value a");
  oracle_cmd->add_option("--b", param_b, "boundary value b");

  CLI::App* demo_cmd = app.add_subcommand("demo", "discretization versus closed form");
  demo_cmd->add_option("which", which, "chain|halfstrip|counterexample|grid2d")->required();
  add_common(demo_cmd, false);
  demo_cmd->add_option("--lambda", opts.lambda, "shift");
  demo_cmd->add_option("--xi", xi, "frequency (halfstrip)");
  demo_cmd->add_option("--L", chain_L, "half-width of the chain window");
  demo_cmd->add_option("--npu", chain_npu, "mesh nodes per unit length (chain)");
  demo_cmd->add_option("--T", domain, "strip truncation length (halfstrip)");
  demo_cmd->add_option("--N", nodes, "mesh nodes (halfstrip)");
  demo_cmd->add_option("--n", family_n, "family index (counterexample)");
  demo_cmd->add_option("--fem", fem_nodes, "mesh nodes (counterexample)");
  demo_cmd->add_option("--a", param_a, "boundary value a");
  demo_cmd->add_option("--b", param_b, "boundary value b");
  demo_cmd->add_option("--outer", outer, "outer grid side (grid2d)");
  demo_cmd->add_option("--inner", inner, "inner box side (grid2d)");

  CLI::App* selftest_cmd = app.add_subcommand("selftest", "run the acceptance battery");
  selftest_cmd->add_option("--filter", filter, "substring filter over criteria");

  CLI11_PARSE(app, argc, argv);

  try {
    if (trace_cmd->parsed()) return run_trace(opts, path_name);
    if (limit_cmd->parsed()) return run_limit(opts, schedule_text, tol);
    if (harm_cmd->parsed()) return run_harmonic(opts);
    if (dc_cmd->parsed()) return run_dirichlet_check(opts, alphas_text, samples);
    if (mosco_cmd->parsed()) {
      if (!mosco_demo.empty()) {
        if (mosco_demo != "counterexample") {
          fail(ErrorCode::ValidationError, "unknown mosco demo '" + mosco_demo + "'");
        }
        return run_mosco_counterexample(opts, n_text, fem_nodes);
      }
      if (sequence_path.empty()) {
        fail(ErrorCode::ValidationError, "mosco needs --sequence or --demo");
      }
      return run_mosco_sequence(opts, sequence_path, tol);
    }
    if (oracle_cmd->parsed()) {
      Json j;
      if (which == "chain") {
        const ChainTraceCoefficients c = chain_coefficients(opts.lambda);
        j = Json{{"lambda", c.lambda}, {"c_off", c.c_off}, {"c_diag", c.c_diag}};
      } else if (which == "halfspace") {
        j = Json{{"xi", xi},
                 {"lambda", opts.lambda},
                 {"value", halfspace_symbol(xi, opts.lambda)}};
      } else if (which == "counterexample") {
        j = Json{{"n", family_n},
                 {"lambda", opts.lambda},
                 {"a", param_a},
                 {"b", param_b},
                 {"value", counterexample_value(family_n, opts.lambda, param_a, param_b)}};
      } else {
        fail(ErrorCode::ValidationError, "unknown oracle '" + which + "'");
      }
      deliver(j, opts.out_path, opts.format);
      return kExitOk;
    }
    if (demo_cmd->parsed()) {
      Json j;
      bool pass = false;
      if (which == "chain") {
        const ChainDemoResult r = fem_chain_demo(chain_L, chain_npu, opts.lambda);
        j = Json{{"computed",
                  Json{{"c_off", -r.T(chain_L, chain_L + 1)},
                       {"c_diag", r.T(chain_L, chain_L) + 2.0 * r.T(chain_L, chain_L + 1)}}},
                 {"oracle", Json{{"c_off", r.oracle.c_off}, {"c_diag", r.oracle.c_diag}}},
                 {"rel_gap", r.rel_gap},
                 {"pass", r.pass}};
        pass = r.pass;
      } else if (which == "halfstrip") {
        const double computed = fem_halfstrip_mode(xi, opts.lambda, domain, nodes);
        j = comparison_report(computed, halfspace_symbol(xi, opts.lambda), 0.005);
        pass = j.at("pass").get<bool>();
      } else if (which == "counterexample") {
        const CounterexampleInstance ce = fem_counterexample(family_n, fem_nodes);
        const TraceForm tf = trace_form(ce.form, ce.map, opts.lambda, TracePath::schur);
        Vector ab(2);
        ab << param_a, param_b;
        j = comparison_report(ab.dot(tf.T * ab),
                              counterexample_value(family_n, opts.lambda, param_a, param_b),
                              0.01);
        pass = j.at("pass").get<bool>();
      } else if (which == "grid2d") {
        const GridDemoResult r = grid2d_nested(outer, inner);
        j = Json{{"computed", r.interior_row_gap},
                 {"oracle", 0.0},
                 {"rel_gap", r.interior_row_gap},
                 {"interface_row_max_dev", r.interface_row_max_dev},
                 {"rotation_gap", r.rotation_gap},
                 {"pass", r.pass}};
        pass = r.pass;
      } else {
        fail(ErrorCode::ValidationError, "unknown demo '" + which + "'");
      }
      deliver(j, opts.out_path, opts.format);
      return pass ? kExitOk : kExitCriterion;
    }
    if (selftest_cmd->parsed()) return run_selftest(filter);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}
