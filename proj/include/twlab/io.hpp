#pragma once

// File formats.
//
// Vectors (JSON): {"entries": [[index, value], ...]} for real vectors and
// {"entries": [[index, re, im], ...]} for complex ones. Indices are 1-based
// JSON integers; duplicates are rejected.
//
// Scans (CSV): '.' decimal separator, 17 significant digits, no locale.

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "twlab/cstruct.hpp"
#include "twlab/errors.hpp"
#include "twlab/interpscale.hpp"
#include "twlab/quasimaps.hpp"
#include "twlab/seqspace.hpp"
#include "twlab/signavg.hpp"
#include "twlab/trivdist.hpp"

namespace twlab::io {

using json = nlohmann::ordered_json;

/// 17 significant digits, shortest exponent form, locale independent.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// NaN and infinities become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

namespace detail {

inline Index parse_index(const json& j) {
  if (!j.is_number_integer()) throw invalid_input("vector index must be an integer");
  if (j.is_number_unsigned()) {
    const auto v = j.get<std::uint64_t>();
    if (v == 0) throw invalid_input("vector indices are 1-based; got 0");
    return static_cast<Index>(v);
  }
  const auto v = j.get<std::int64_t>();
  if (v < 1) throw invalid_input("vector indices are 1-based; got " + std::to_string(v));
  return static_cast<Index>(v);
}

inline double parse_value(const json& j) {
  if (!j.is_number()) throw invalid_input("vector coefficient must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw invalid_input("vector coefficient must be finite");
  return v;
}

inline const json& entries_of(const json& doc) {
  if (!doc.is_object() || !doc.contains("entries") || !doc.at("entries").is_array()) {
    throw invalid_input("vector file must be an object with an \"entries\" array");
  }
  return doc.at("entries");
}

}  // namespace detail

inline SparseVector parse_vector(const json& doc) {
  std::vector<SparseVector::Entry> out;
  for (const auto& e : detail::entries_of(doc)) {
    if (!e.is_array() || e.size() != 2) {
      throw invalid_input("real vector entries must be [index, value]");
    }
    out.emplace_back(detail::parse_index(e[0]), detail::parse_value(e[1]));
  }
  return SparseVector(std::move(out));
}

inline ComplexVector parse_complex_vector(const json& doc) {
  std::vector<ComplexVector::Entry> out;
  for (const auto& e : detail::entries_of(doc)) {
    if (!e.is_array() || e.size() != 3) {
      throw invalid_input("complex vector entries must be [index, re, im]");
    }
    out.emplace_back(detail::parse_index(e[0]),
                     std::complex<double>(detail::parse_value(e[1]), detail::parse_value(e[2])));
  }
  return ComplexVector(std::move(out));
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw invalid_input("malformed JSON in '" + path + "': " + e.what());
  }
}

inline json to_json(const SparseVector& x) {
  json entries = json::array();
  for (const auto& [i, v] : x) entries.push_back(json::array({i, v + 0.0}));
  return json{{"entries", std::move(entries)}};
}

inline json to_json(const ComplexVector& x) {
  json entries = json::array();
  for (const auto& [i, v] : x) entries.push_back(json::array({i, v.real() + 0.0, v.imag() + 0.0}));
  return json{{"entries", std::move(entries)}};
}

inline json to_json(const SignAverageResult& r) {
  json j{{"value", r.value},
         {"method", to_string(r.method)},
         {"count", r.count},
         {"std_error", r.std_error}};
  j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
  return j;
}

inline json to_json(const EstimatorReport& r) {
  json w = json::array();
  for (const auto& v : r.argmax_witness) w.push_back(to_json(v));
  return json{{"map", r.map},     {"quantity", r.quantity}, {"trials", r.trials},
              {"dim", r.dim},     {"seed", r.seed},         {"value", r.value},
              {"method", "max-over-samples"}, {"std_error", 0.0},
              {"argmax_witness", std::move(w)}};
}

inline json to_json(const StructureReport& r) {
  return json{{"structure", r.structure}, {"trials", r.trials},
              {"dim", r.dim},             {"seed", r.seed},
              {"value", r.max_defect},    {"method", "max-over-samples"},
              {"std_error", 0.0},         {"passes", r.passes},
              {"witness", to_json(r.witness)}};
}

inline json to_json(const BatchBound& r) {
  json w = json::array();
  for (const auto& v : r.argmax_witness) w.push_back(to_json(v));
  return json{{"quantity", r.quantity},
              {"samples", r.samples},
              {"seed", r.seed},
              {"min_dim", r.min_dim},
              {"max_dim", r.max_dim},
              {"value", r.value},
              {"bound", r.bound},
              {"method", "max-over-samples"},
              {"std_error", 0.0},
              {"argmax_witness", std::move(w)}};
}

inline json trivdist_report(const std::string& basis, std::size_t n, const LowerBound& lo,
                            const UpperBound& up) {
  return json{{"basis", basis},
              {"n", n},
              {"lower", lo.value},
              {"lower_nabla", to_json(lo.nabla)},
              {"upper", up.value},
              {"witness_lambda", lo.witness_lambda},
              {"witness_x", to_json(up.witness_x)},
              {"restarts", up.restarts},
              {"seed", up.seed}};
}

inline std::string scan_csv(const std::vector<ScanRow>& rows) {
  std::ostringstream out;
  out << "n,value,method,std_error,value_per_sqrt_n,value_per_sqrt_n_log_n\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.result.value) << ',' << to_string(r.result.method) << ','
        << format_double(r.result.std_error) << ',' << format_double(r.per_sqrt_n) << ','
        << format_double(r.per_sqrt_n_log_n) << '\n';
  }
  return out.str();
}

inline std::string obstruction_csv(const std::vector<ObstructionRow>& rows) {
  std::ostringstream out;
  out << "n,numerator,denominator,ratio,method\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.terms.numerator.value) << ','
        << format_double(r.terms.denominator) << ',' << format_double(r.terms.ratio) << ','
        << to_string(r.method) << '\n';
  }
  return out.str();
}

inline std::string interp_csv(const std::vector<DefectReport>& rows) {
  std::ostringstream out;
  out << "n,c_n,defect_max,samples,seed\n";
  for (const auto& r : rows) {
    out << r.n << ',' << format_double(r.c_n) << ',' << format_double(r.defect_max) << ','
        << r.samples << ',' << r.seed << '\n';
  }
  return out.str();
}

inline std::string vector_csv(const SparseVector& x) {
  std::ostringstream out;
  out << "index,value\n";
  for (const auto& [i, v] : x) out << i << ',' << format_double(v) << '\n';
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_input("cannot write '" + path + "'");
  out << text;
}

}  // namespace twlab::io
