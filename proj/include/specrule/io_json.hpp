#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "specrule/linalg.hpp"
#include "specrule/measures.hpp"
#include "specrule/oprl.hpp"
#include "specrule/opuc.hpp"
#include "specrule/sumrules.hpp"

namespace specrule {

using nlohmann::json;

// Non-finite values travel as strings; everything else as plain numbers.
inline json encode_real(double x) {
  if (std::isnan(x)) return json("nan");
  if (std::isinf(x)) return json(x > 0 ? "inf" : "-inf");
  return json(x);
}

inline double decode_real(const json& j, const char* what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
  }
  throw std::invalid_argument(std::string(what) + ": expected a real value");
}

/// Locale-independent shortest-exact decimal for CSV cells.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace detail {

inline void require_version(const json& j, const char* what) {
  if (!j.is_object() || !j.contains("v") || !j["v"].is_number_integer() ||
      j["v"].get<int>() != 1)
    throw std::invalid_argument(std::string(what) +
                                ": missing or unsupported \"v\" tag");
}

inline const json& need(const json& j, const char* key, const char* what) {
  if (!j.contains(key))
    throw std::invalid_argument(std::string(what) + ": missing field \"" +
                                key + "\"");
  return j.at(key);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// VerblunskySeq
// ---------------------------------------------------------------------------

inline json to_json(const VerblunskySeq& seq) {
  json coeffs = json::array();
  for (const auto& a : seq.coeffs) coeffs.push_back({a.real(), a.imag()});
  return json{{"v", 1},
              {"kind", seq.kind == VerblunskySeq::Kind::Terminated
                           ? "terminated"
                           : "interior"},
              {"coeffs", std::move(coeffs)}};
}

inline VerblunskySeq verblunsky_from_json(const json& j) {
  detail::require_version(j, "VerblunskySeq");
  VerblunskySeq seq;
  const std::string kind =
      detail::need(j, "kind", "VerblunskySeq").get<std::string>();
  if (kind == "terminated")
    seq.kind = VerblunskySeq::Kind::Terminated;
  else if (kind == "interior")
    seq.kind = VerblunskySeq::Kind::Interior;
  else
    throw std::invalid_argument("VerblunskySeq: unknown kind \"" + kind + "\"");
  for (const auto& c : detail::need(j, "coeffs", "VerblunskySeq")) {
    if (!c.is_array() || c.size() != 2)
      throw std::invalid_argument("VerblunskySeq: coefficients are [re, im] pairs");
    seq.coeffs.emplace_back(decode_real(c[0], "VerblunskySeq"),
                            decode_real(c[1], "VerblunskySeq"));
  }
  seq.validate();
  return seq;
}

// ---------------------------------------------------------------------------
// Complex matrices
// ---------------------------------------------------------------------------

inline json to_json(const CMatrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("matrix serialization: square matrices only");
  json entries = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k)
      entries.push_back({m(i, k).real(), m(i, k).imag()});
  return json{{"v", 1}, {"n", m.rows()}, {"entries", std::move(entries)}};
}

inline CMatrix matrix_from_json(const json& j) {
  detail::require_version(j, "ComplexMatrix");
  const auto n = detail::need(j, "n", "ComplexMatrix").get<Eigen::Index>();
  if (n < 1) throw std::invalid_argument("ComplexMatrix: need n >= 1");
  const json& entries = detail::need(j, "entries", "ComplexMatrix");
  if (static_cast<Eigen::Index>(entries.size()) != n * n)
    throw std::invalid_argument("ComplexMatrix: expected n*n entries");
  CMatrix m(n, n);
  Eigen::Index idx = 0;
  for (const auto& c : entries) {
    if (!c.is_array() || c.size() != 2)
      throw std::invalid_argument("ComplexMatrix: entries are [re, im] pairs");
    m(idx / n, idx % n) = cplx(decode_real(c[0], "ComplexMatrix"),
                               decode_real(c[1], "ComplexMatrix"));
    ++idx;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Jacobi data
// ---------------------------------------------------------------------------

inline json to_json(const JacobiParams& jp) {
  return json{{"v", 1}, {"a", jp.a}, {"b", jp.b}};
}

inline JacobiParams jacobi_from_json(const json& j) {
  detail::require_version(j, "JacobiParams");
  JacobiParams jp;
  for (const auto& x : detail::need(j, "a", "JacobiParams"))
    jp.a.push_back(decode_real(x, "JacobiParams"));
  for (const auto& x : detail::need(j, "b", "JacobiParams"))
    jp.b.push_back(decode_real(x, "JacobiParams"));
  jp.validate();
  return jp;
}

inline json to_json(const FiniteRankPerturbation& pert) {
  return json{{"v", 1},
              {"prefix", json{{"a", pert.prefix.a}, {"b", pert.prefix.b}}}};
}

inline FiniteRankPerturbation perturbation_from_json(const json& j) {
  detail::require_version(j, "FiniteRankPerturbation");
  const json& p = detail::need(j, "prefix", "FiniteRankPerturbation");
  FiniteRankPerturbation out;
  for (const auto& x : detail::need(p, "a", "FiniteRankPerturbation"))
    out.prefix.a.push_back(decode_real(x, "FiniteRankPerturbation"));
  for (const auto& x : detail::need(p, "b", "FiniteRankPerturbation"))
    out.prefix.b.push_back(decode_real(x, "FiniteRankPerturbation"));
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Spectral measures
// ---------------------------------------------------------------------------

inline json to_json(const SpectralMeasure& mu) {
  json atoms = json::array();
  for (const auto& a : mu.atoms)
    atoms.push_back({{"pos", a.pos}, {"weight", a.weight}});
  json out{{"v", 1},
           {"domain", mu.domain == Domain::Circle ? "circle" : "line"},
           {"atoms", std::move(atoms)}};
  if (mu.has_ac()) {
    out["ac"] = json{{"grid", mu.ac->grid}, {"values", mu.ac->values}};
  }
  return out;
}

inline SpectralMeasure measure_from_json(const json& j) {
  detail::require_version(j, "SpectralMeasure");
  SpectralMeasure mu;
  const std::string dom =
      detail::need(j, "domain", "SpectralMeasure").get<std::string>();
  if (dom == "circle")
    mu.domain = Domain::Circle;
  else if (dom == "line")
    mu.domain = Domain::Line;
  else
    throw std::invalid_argument("SpectralMeasure: unknown domain \"" + dom + "\"");
  for (const auto& a : detail::need(j, "atoms", "SpectralMeasure")) {
    mu.atoms.push_back({decode_real(detail::need(a, "pos", "SpectralMeasure"),
                                    "SpectralMeasure"),
                        decode_real(detail::need(a, "weight", "SpectralMeasure"),
                                    "SpectralMeasure")});
  }
  if (j.contains("ac") && !j["ac"].is_null()) {
    AcPart ac;
    for (const auto& x : detail::need(j["ac"], "grid", "SpectralMeasure"))
      ac.grid.push_back(decode_real(x, "SpectralMeasure"));
    for (const auto& x : detail::need(j["ac"], "values", "SpectralMeasure"))
      ac.values.push_back(decode_real(x, "SpectralMeasure"));
    mu.ac = std::move(ac);
  }
  // serialized a.c. parts are grid samples; the interpolated mass can sit a
  // few parts in 1e7 away from 1, so the read-side check is loosened to the
  // discretization scale rather than the in-memory default
  mu.validate(1e-6);
  return mu;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline json to_json(const SumRuleReport& rep) {
  json terms = json::object();
  for (const auto& [k, v] : rep.terms) terms[k] = encode_real(v);
  json out{{"v", 1},
           {"rule", rep.rule},
           {"coefficient_side", encode_real(rep.coefficient_side)},
           {"measure_side", encode_real(rep.measure_side)},
           {"defect", encode_real(rep.defect)},
           {"terms", std::move(terms)}};
  if (!rep.note.empty()) out["note"] = rep.note;
  return out;
}

inline json reports_to_json(const std::vector<SumRuleReport>& reps) {
  json items = json::array();
  for (const auto& r : reps) items.push_back(to_json(r));
  return json{{"v", 1},
              {"kind", "reports"},
              {"count", reps.size()},
              {"reports", std::move(items)}};
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << j.dump(1) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace specrule
