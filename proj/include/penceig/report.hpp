#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "errors.hpp"
#include "solvers.hpp"
#include "types.hpp"

namespace penceig {

inline nlohmann::json complex_to_json(cx v) {
  return nlohmann::json::array({v.real(), v.imag()});
}

inline cx complex_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw StructuralError("expected a [re, im] pair");
  return cx(j[0].get<double>(), j[1].get<double>());
}

/// Parses "a+bi" style complex literals: "2", "-3.5", "4i", "-0.5-2i",
/// "1e-3+2.5e-2i", "i", "-i".
inline cx parse_complex(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw StructuralError("empty complex literal");

  const auto parse_real = [](const std::string& part) {
    if (part == "" || part == "+") return 1.0;
    if (part == "-") return -1.0;
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (end != part.c_str() + part.size())
      throw StructuralError("cannot parse number \"" + part + "\"");
    return v;
  };

  // Split before the sign of the imaginary part: the last '+' or '-'
  // that is not an exponent sign and not the leading sign.
  size_t split = std::string::npos;
  for (size_t i = 1; i < s.size(); ++i) {
    if (s[i] != '+' && s[i] != '-') continue;
    const char prev = s[i - 1];
    if (prev == 'e' || prev == 'E') continue;
    split = i;
  }

  const bool has_i = (s.back() == 'i' || s.back() == 'I');
  if (!has_i) {
    if (split != std::string::npos)
      throw StructuralError("cannot parse complex literal \"" + text + "\"");
    return cx(parse_real(s), 0.0);
  }
  const std::string body = s.substr(0, s.size() - 1);
  if (split == std::string::npos) return cx(0.0, parse_real(body));
  return cx(parse_real(s.substr(0, split)), parse_real(body.substr(split)));
}

inline std::string format_complex(cx v) {
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", v.real(), v.imag());
  return buf;
}

inline nlohmann::json record_to_json(const ConvergenceRecord& rec) {
  nlohmann::json j;
  j["lambda"] = complex_to_json(rec.lambda);
  j["mu"] = complex_to_json(rec.mu);
  j["sigma"] = complex_to_json(rec.sigma);
  j["iterations"] = rec.iterations;
  j["lu"] = rec.lu_count;
  j["residual_order"] = rec.residual_order;
  j["source_shift"] = rec.source_shift;
  j["xi"] = rec.xi ? complex_to_json(*rec.xi) : nlohmann::json();
  return j;
}

inline ConvergenceRecord record_from_json(const nlohmann::json& j) {
  ConvergenceRecord rec;
  rec.lambda = complex_from_json(j.at("lambda"));
  rec.mu = complex_from_json(j.at("mu"));
  rec.sigma = complex_from_json(j.at("sigma"));
  rec.iterations = j.at("iterations").get<int>();
  rec.lu_count = j.at("lu").get<int>();
  rec.residual_order = j.at("residual_order").get<int>();
  rec.source_shift = j.at("source_shift").get<int>();
  if (!j.at("xi").is_null()) rec.xi = complex_from_json(j.at("xi"));
  return rec;
}

inline nlohmann::json summary_to_json(const TrajectorySummary& s) {
  nlohmann::json j;
  j["shift_index"] = s.shift_index;
  j["initial_shift"] = complex_to_json(s.initial_shift);
  j["status"] = to_string(s.status);
  j["iterations"] = s.iterations;
  j["lu"] = s.lu_count;
  j["singular_retries"] = s.singular_retries;
  j["xi"] = s.xi ? complex_to_json(*s.xi) : nlohmann::json();
  return j;
}

/// Full solve report.  The parameters block must echo the run
/// configuration but never anything execution-dependent (thread count,
/// timing), so reports are byte-identical across schedules.
inline nlohmann::json report_to_json(const std::string& algorithm,
                                     const nlohmann::json& parameters,
                                     const SolveOutcome& outcome) {
  nlohmann::json j;
  j["algorithm"] = algorithm;
  j["parameters"] = parameters;
  j["records"] = nlohmann::json::array();
  for (const auto& rec : outcome.records) j["records"].push_back(record_to_json(rec));
  j["trajectories"] = nlohmann::json::array();
  for (const auto& s : outcome.trajectories)
    j["trajectories"].push_back(summary_to_json(s));
  return j;
}

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out << j.dump(2) << "\n";
  if (!out) throw ParseError(path, 0, "write failed");
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 0, e.what());
  }
}

inline void write_report_csv(const std::vector<ConvergenceRecord>& records,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out << "converged_value_re,converged_value_im,iter,lu,residual_order\n";
  char buf[160];
  for (const auto& rec : records) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%d,%d\n",
                  rec.lambda.real(), rec.lambda.imag(), rec.iterations,
                  rec.lu_count, rec.residual_order);
    out << buf;
  }
  if (!out) throw ParseError(path, 0, "write failed");
}

inline nlohmann::json spectrum_to_json(const std::vector<cx>& spectrum) {
  nlohmann::json j = nlohmann::json::array();
  for (cx v : spectrum) j.push_back(complex_to_json(v));
  return j;
}

inline std::vector<cx> spectrum_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw StructuralError("spectrum: expected a JSON array");
  std::vector<cx> out;
  for (const auto& e : j) out.push_back(complex_from_json(e));
  return out;
}

}  // namespace penceig
