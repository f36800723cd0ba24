#pragma once

// The twlab command-line application. `run` is the whole program minus the
// process boundary so tests can drive it in-process.
//
// Exit codes: 0 success, 2 invalid input, 3 budget exceeded.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twlab/cstruct.hpp"
#include "twlab/errors.hpp"
#include "twlab/interpscale.hpp"
#include "twlab/io.hpp"
#include "twlab/quasimaps.hpp"
#include "twlab/seqspace.hpp"
#include "twlab/signavg.hpp"
#include "twlab/trivdist.hpp"

namespace twlab::app {

inline constexpr int exit_ok = 0;
inline constexpr int exit_invalid = 2;
inline constexpr int exit_budget = 3;

struct Globals {
  std::int64_t seed = 0;
  std::string out;
  double tolerance = 1e-9;
  bool json_only = false;
  unsigned workers = 1;
};

namespace detail {

using io::json;

inline const std::map<std::string, Family> family_names{{"canonical", Family::canonical},
                                                        {"walsh", Family::walsh}};
inline const std::map<std::string, ScanMode> mode_names{{"exact", ScanMode::exact},
                                                        {"mc", ScanMode::monte_carlo},
                                                        {"auto", ScanMode::automatic}};

inline QuasiMap select_map(const std::string& name, double scale) {
  QuasiMap base = name == "zero" ? zero_map() : kalton_peck_map();
  return scale == 1.0 ? base : scale * base;
}

struct Output {
  json doc;
  std::string summary;
  std::optional<std::string> csv;
};

inline void merge(json& into, const json& from) {
  for (const auto& [k, v] : from.items()) into[k] = v;
}

inline json row_json(const ScanRow& r) {
  json j{{"n", r.n}};
  merge(j, io::to_json(r.result));
  j["value_per_sqrt_n"] = io::number(r.per_sqrt_n);
  j["value_per_sqrt_n_log_n"] = io::number(r.per_sqrt_n_log_n);
  return j;
}

inline json exact_fields(json j, double value, const Globals& g) {
  j["value"] = value;
  j["method"] = "exact";
  j["count"] = 1;
  j["std_error"] = 0.0;
  j["seed"] = g.seed;
  return j;
}

}  // namespace detail

/// Runs the CLI on `args` (args[0] is the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using detail::json;
  using detail::Output;

  CLI::App app{"twlab: numerical laboratory for twisted Hilbert spaces and the Kalton-Peck map",
               "twlab"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every sampled quantity")
      ->envname("TWLAB_SEED")
      ->capture_default_str();
  app.add_option("--out", g.out, "Write the CSV table (or vector) of the command here");
  app.add_option("--tolerance", g.tolerance, "Slack for pass/fail checks")->capture_default_str();
  app.add_flag("--json", g.json_only, "Compact JSON on stdout, no summary on stderr");
  app.add_option("--workers", g.workers, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1U, 256U))
      ->capture_default_str();

  std::optional<Output> result;

  // kp
  std::string kp_input;
  bool kp_complex = false;
  auto* kp = app.add_subcommand("kp", "Evaluate the Kalton-Peck map on a vector file");
  kp->add_option("--input", kp_input, "Vector JSON file")->required();
  kp->add_flag("--complex", kp_complex, "Input uses [index, re, im] entries; apply K^C");
  kp->callback([&] {
    const json doc = io::read_json_file(kp_input);
    json j{{"command", "kp"}};
    if (kp_complex) {
      const ComplexVector y = kalton_peck_complex(io::parse_complex_vector(doc));
      j["map"] = "kalton-peck-complex";
      j["vector"] = io::to_json(y);
      std::string csv = "index,re,im\n";
      for (const auto& [i, v] : y) {
        csv += std::to_string(i) + ',' + io::format_double(v.real()) + ',' +
               io::format_double(v.imag()) + '\n';
      }
      result = Output{detail::exact_fields(j, l2_norm(y), g),
                      "||K^C(x)|| = " + io::format_double(l2_norm(y)), csv};
    } else {
      const SparseVector y = kalton_peck(io::parse_vector(doc));
      j["map"] = "kalton-peck";
      j["vector"] = io::to_json(y);
      result = Output{detail::exact_fields(j, l2_norm(y), g),
                      "||K(x)|| = " + io::format_double(l2_norm(y)), io::vector_csv(y)};
    }
  });

  // quasinorm
  std::string qn_w, qn_x;
  auto* qn = app.add_subcommand("quasinorm", "Twisted quasi-norm ||x|| + ||w - K(x)||");
  qn->add_option("--w", qn_w, "Vector file for the subspace coordinate w");
  qn->add_option("--x", qn_x, "Vector file for the quotient coordinate x");
  qn->callback([&] {
    const SparseVector w = qn_w.empty() ? SparseVector{} : io::parse_vector(io::read_json_file(qn_w));
    const SparseVector x = qn_x.empty() ? SparseVector{} : io::parse_vector(io::read_json_file(qn_x));
    const double v = twisted_quasinorm(TwistedPoint{w, x, kalton_peck_map()});
    result = Output{detail::exact_fields(json{{"command", "quasinorm"}, {"map", "kalton-peck"}}, v, g),
                    "||(w, x)|| = " + io::format_double(v), std::nullopt};
  });

  // nabla
  Family nb_family = Family::canonical;
  std::size_t nb_n = 4;
  ScanMode nb_mode = ScanMode::exact;
  std::uint64_t nb_samples = 5000;
  std::vector<double> nb_lambda;
  std::string nb_map = "kp";
  double nb_scale = 1.0;
  auto* nb = app.add_subcommand("nabla", "Sign average over a canonical or Walsh block");
  nb->add_option("--basis", nb_family, "canonical | walsh")
      ->transform(CLI::CheckedTransformer(detail::family_names, CLI::ignore_case));
  nb->add_option("--n", nb_n, "Number of basis vectors")->check(CLI::PositiveNumber);
  nb->add_option("--mode", nb_mode, "exact | mc | auto")
      ->transform(CLI::CheckedTransformer(detail::mode_names, CLI::ignore_case));
  nb->add_option("--samples", nb_samples, "Monte-Carlo samples")->check(CLI::Range(2ULL, 1ULL << 40));
  nb->add_option("--lambda", nb_lambda, "Coefficients (comma separated); default all ones")
      ->delimiter(',');
  nb->add_option("--map", nb_map, "kp | zero")->check(CLI::IsMember({"kp", "zero"}));
  nb->add_option("--scale", nb_scale, "Multiply the map by this scalar");
  nb->callback([&] {
    const BlockBasis b = family_basis(nb_family, nb_n);
    std::vector<double> lambda = nb_lambda.empty() ? std::vector<double>(nb_n, 1.0) : nb_lambda;
    const QuasiMap omega = detail::select_map(nb_map, nb_scale);
    SignAverageResult r;
    switch (nb_mode) {
      case ScanMode::exact: r = nabla_exact(omega, b, lambda, false, g.workers); break;
      case ScanMode::monte_carlo: r = nabla_mc(omega, b, lambda, nb_samples, g.seed, g.workers); break;
      case ScanMode::automatic:
        r = nabla_auto(omega, b, lambda, nb_samples, g.seed, default_work_budget, g.workers);
        break;
    }
    json j{{"command", "nabla"}, {"map", omega.label()}, {"basis", b.label()}, {"n", nb_n},
           {"lambda", lambda}};
    detail::merge(j, io::to_json(r));
    result = Output{j, "nabla = " + io::format_double(r.value) + " (" + to_string(r.method) + ")",
                    std::nullopt};
  });

  // scan-nabla
  ScanOptions sc;
  sc.first = 1;
  sc.last = 12;
  std::string sc_map = "kp";
  auto* scan = app.add_subcommand("scan-nabla", "Sign averages over a range of block sizes");
  scan->add_option("--basis", sc.family, "canonical | walsh")
      ->transform(CLI::CheckedTransformer(detail::family_names, CLI::ignore_case));
  scan->add_option("--from", sc.first, "First n")->check(CLI::PositiveNumber);
  scan->add_option("--to", sc.last, "Last n")->check(CLI::PositiveNumber);
  scan->add_option("--mode", sc.mode, "exact | mc | auto")
      ->transform(CLI::CheckedTransformer(detail::mode_names, CLI::ignore_case));
  scan->add_option("--samples", sc.samples, "Monte-Carlo samples")->check(CLI::Range(2ULL, 1ULL << 40));
  scan->add_flag("--even-only", sc.even_only, "Skip odd n");
  scan->add_option("--map", sc_map, "kp | zero")->check(CLI::IsMember({"kp", "zero"}));
  scan->callback([&] {
    sc.seed = g.seed;
    sc.workers = g.workers;
    const auto rows = nabla_scan(detail::select_map(sc_map, 1.0), sc);
    json jr = json::array();
    for (const auto& r : rows) jr.push_back(detail::row_json(r));
    result = Output{json{{"command", "scan-nabla"},
                         {"basis", sc.family == Family::canonical ? "canonical" : "walsh"},
                         {"rows", jr}},
                    std::to_string(rows.size()) + " rows", io::scan_csv(rows)};
  });

  // obstruction
  std::size_t ob_first = 2, ob_last = 16;
  std::uint64_t ob_samples = 256;
  auto* ob = app.add_subcommand("obstruction",
                                "Ratio nabla(canonical) / (||lambda|| + nabla(walsh)) over n");
  ob->add_option("--from", ob_first, "First n")->check(CLI::PositiveNumber);
  ob->add_option("--to", ob_last, "Last n")->check(CLI::PositiveNumber);
  ob->add_option("--samples", ob_samples, "Samples when a sign average is too large to enumerate")
      ->check(CLI::Range(2ULL, 1ULL << 40));
  ob->callback([&] {
    const auto rows = obstruction_scan(kalton_peck_map(), ob_first, ob_last, ob_samples, g.seed,
                                       default_work_budget, g.workers);
    json jr = json::array();
    for (const auto& r : rows) {
      jr.push_back(json{{"n", r.n},
                        {"numerator", io::to_json(r.terms.numerator)},
                        {"trivial_part", io::to_json(r.terms.trivial_part)},
                        {"denominator", r.terms.denominator},
                        {"ratio", r.terms.ratio},
                        {"method", to_string(r.method)}});
    }
    result = Output{json{{"command", "obstruction"}, {"rows", jr}},
                    std::to_string(rows.size()) + " rows", io::obstruction_csv(rows)};
  });

  // complexify-check
  std::uint64_t cx_samples = 100000;
  std::size_t cx_min = 2, cx_max = 128;
  auto* cx = app.add_subcommand("complexify-check",
                                "Batch bounds for ||AK - K^C A|| and the split map T");
  cx->add_option("--samples", cx_samples, "Samples per batch")->check(CLI::PositiveNumber);
  cx->add_option("--min-dim", cx_min, "Smallest sampled dimension")->check(CLI::PositiveNumber);
  cx->add_option("--max-dim", cx_max, "Largest sampled dimension")->check(CLI::PositiveNumber);
  cx->callback([&] {
    const BatchBound a = complexification_batch(cx_samples, g.seed, cx_min, cx_max, g.workers);
    const BatchBound t = t_bound_batch(cx_samples, g.seed, cx_min, cx_max, g.workers);
    const bool a_ok = a.value <= a.bound + g.tolerance;
    const bool t_ok = t.value <= t.bound + g.tolerance;
    result = Output{json{{"command", "complexify-check"},
                         {"a_defect", io::to_json(a)},
                         {"a_passes", a_ok},
                         {"t_split", io::to_json(t)},
                         {"t_passes", t_ok}},
                    "A-defect max " + io::format_double(a.value) + (a_ok ? " ok" : " FAIL") +
                        ", T-ratio max " + io::format_double(t.value) + (t_ok ? " ok" : " FAIL"),
                    std::nullopt};
  });

  // structure-check
  std::string st_kind = "omega";
  std::size_t st_n = 3, st_dim = 0;
  std::uint64_t st_trials = 1000;
  auto* st = app.add_subcommand("structure-check",
                                "Sampled u^2 = -id defect and commutator with K");
  st->add_option("--structure", st_kind, "omega | identity | blocks")
      ->check(CLI::IsMember({"omega", "identity", "blocks"}));
  st->add_option("--n", st_n, "Block size for --structure blocks")->check(CLI::PositiveNumber);
  st->add_option("--trials", st_trials, "Samples")->check(CLI::PositiveNumber);
  st->add_option("--dim", st_dim, "Sampled index range (0: structure default)");
  st->callback([&] {
    const ComplexStructure u =
        st_kind == "omega"      ? ComplexStructure::omega()
        : st_kind == "identity" ? ComplexStructure::identity()
                                : ComplexStructure::from_blocks(walsh_block(st_n), canonical_basis(st_n));
    StructureReport rep = check_structure(u, st_trials, g.seed, st_dim, g.tolerance, g.workers);
    const EstimatorReport com =
        commutator_defect(u, kalton_peck_map(), st_trials, rep.dim, g.seed, g.workers);
    result = Output{json{{"command", "structure-check"},
                         {"square", io::to_json(rep)},
                         {"commutator", io::to_json(com)}},
                    u.label() + ": u^2 defect " + io::format_double(rep.max_defect) +
                        (rep.passes ? " ok" : " FAIL") + ", commutator " +
                        io::format_double(com.value),
                    std::nullopt};
  });

  // trivdist
  Family td_family = Family::canonical;
  std::size_t td_n = 4;
  LowerSearch td_lower;
  UpperOptions td_upper;
  auto* td = app.add_subcommand("trivdist", "Lower and upper evidence for the triviality constant");
  td->add_option("--basis", td_family, "canonical | walsh")
      ->transform(CLI::CheckedTransformer(detail::family_names, CLI::ignore_case));
  td->add_option("--n", td_n, "Block size")->check(CLI::PositiveNumber);
  td->add_option("--restarts", td_upper.restarts, "Random restarts of the sphere ascent");
  td->add_option("--max-steps", td_upper.max_steps, "Ascent steps per restart");
  td->add_option("--signs", td_lower.random_signs, "Random sign coefficient vectors tried");
  td->add_option("--gaussians", td_lower.random_gaussian, "Random Gaussian coefficient vectors tried");
  td->callback([&] {
    const BlockBasis b = family_basis(td_family, td_n);
    td_lower.seed = g.seed;
    td_lower.workers = g.workers;
    const LowerBound lo = trivdist_lower(kalton_peck_map(), b, td_lower);
    td_upper.seed = g.seed;
    td_upper.workers = g.workers;
    td_upper.extra_starts = {lo.witness_lambda};
    const UpperBound up = trivdist_upper(kalton_peck_map(), b, td_upper);
    json j = io::trivdist_report(b.label(), td_n, lo, up);
    j["command"] = "trivdist";
    j["value"] = lo.value;
    j["method"] = to_string(lo.nabla.method);
    j["count"] = lo.nabla.count;
    j["std_error"] = lo.nabla.std_error / (2.0 * euclidean_norm(lo.witness_lambda));
    result = Output{j,
                    "lower " + io::format_double(lo.value) + ", upper " +
                        io::format_double(up.value),
                    std::nullopt};
  });

  // interp-check
  std::size_t ic_first = 2, ic_last = 12;
  std::uint64_t ic_samples = 2000;
  bool ic_even = false;
  auto* ic = app.add_subcommand("interp-check",
                                "Near-eigenvector defect of K on Walsh spans over n");
  ic->add_option("--from", ic_first, "First n")->check(CLI::PositiveNumber);
  ic->add_option("--to", ic_last, "Last n")->check(CLI::PositiveNumber);
  ic->add_option("--samples", ic_samples, "Samples per n")->check(CLI::PositiveNumber);
  ic->add_flag("--even-only", ic_even, "Skip odd n");
  ic->callback([&] {
    if (ic_first > ic_last) throw invalid_input("need --from <= --to");
    std::vector<DefectReport> rows;
    for (std::size_t n = ic_first; n <= ic_last; ++n) {
      if (ic_even && n % 2 != 0) continue;
      rows.push_back(near_eigenvector_defect(n, ic_samples, g.seed, g.workers));
    }
    json jr = json::array();
    for (const auto& r : rows) {
      jr.push_back(json{{"n", r.n},
                        {"c_n", r.c_n},
                        {"value", r.defect_max},
                        {"method", "max-over-samples"},
                        {"count", r.samples},
                        {"std_error", 0.0},
                        {"seed", r.seed}});
    }
    result = Output{json{{"command", "interp-check"}, {"rows", jr}},
                    std::to_string(rows.size()) + " rows", io::interp_csv(rows)};
  });

  // constants
  std::string cs_map = "kp";
  double cs_scale = 1.0;
  std::uint64_t cs_trials = 1000;
  std::size_t cs_dim = 16;
  auto* cs = app.add_subcommand("constants", "Quasi-linearity constant and centralizer defect");
  cs->add_option("--map", cs_map, "kp | zero")->check(CLI::IsMember({"kp", "zero"}));
  cs->add_option("--scale", cs_scale, "Multiply the map by this scalar");
  cs->add_option("--trials", cs_trials, "Samples")->check(CLI::PositiveNumber);
  cs->add_option("--dim", cs_dim, "Sampled index range")->check(CLI::PositiveNumber);
  cs->callback([&] {
    const QuasiMap omega = detail::select_map(cs_map, cs_scale);
    const EstimatorReport q = quasilinearity_constant(omega, cs_trials, cs_dim, g.seed, g.workers);
    const EstimatorReport c = centralizer_defect(omega, cs_trials, cs_dim, g.seed, g.workers);
    result = Output{json{{"command", "constants"},
                         {"quasilinearity", io::to_json(q)},
                         {"centralizer", io::to_json(c)}},
                    "Z >= " + io::format_double(q.value) + ", centralizer >= " +
                        io::format_double(c.value),
                    std::nullopt};
  });

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << " (run with --help for usage)\n";
    return exit_invalid;
  } catch (const budget_exceeded& e) {
    err << "error: " << e.what() << '\n';
    return exit_budget;
  } catch (const invalid_input& e) {
    err << "error: " << e.what() << '\n';
    return exit_invalid;
  }

  if (!result) return exit_invalid;
  try {
    if (!g.out.empty()) {
      io::write_text_file(g.out, result->csv ? *result->csv : io::json(result->doc).dump(2) + "\n");
    }
  } catch (const invalid_input& e) {
    err << "error: " << e.what() << '\n';
    return exit_invalid;
  }
  out << (g.json_only ? result->doc.dump() : result->doc.dump(2)) << '\n';
  if (!g.json_only) err << result->summary << '\n';
  return exit_ok;
}

}  // namespace twlab::app
