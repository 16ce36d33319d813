#pragma once

// Flat "key = value" configuration documents. Keys are the field names of
// ModelConfig / ExperimentSpec; '#' starts a comment.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "eki/error.hpp"
#include "eki/experiments.hpp"
#include "eki/io.hpp"

namespace eki {

using ConfigMap = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline double parse_real(const std::string& key, const std::string& text) {
  double x = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, x);
  if (res.ec != std::errc() || res.ptr != end) throw InvalidArgument("config: '" + key + "' expects a number, got '" + text + "'");
  return x;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& text) {
  // accepts "10000" as well as "1e4"
  const double x = parse_real(key, text);
  if (!(x >= 0.0) || x != std::floor(x) || x > 1.8e19)
    throw InvalidArgument("config: '" + key + "' expects a non-negative integer, got '" + text + "'");
  return static_cast<std::uint64_t>(x);
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InvalidArgument("config: '" + key + "' expects true/false, got '" + text + "'");
}

inline std::vector<std::size_t> parse_count_list(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<std::size_t>(parse_count(key, trim(item))));
  if (out.empty()) throw InvalidArgument("config: '" + key + "' must list at least one value");
  return out;
}

}  // namespace detail

inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    out[detail::trim(t.substr(0, eq))] = detail::trim(t.substr(eq + 1));
  }
  return out;
}

inline ConfigMap read_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot read config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

/// Applies every entry of `values` to `spec`; unknown keys are rejected.
inline void apply_config(const ConfigMap& values, ExperimentSpec& spec) {
  using namespace detail;
  ModelConfig& m = spec.model;
  for (const auto& [key, val] : values) {
    if (key == "alpha") m.alpha = parse_real(key, val);
    else if (key == "p") m.p = parse_real(key, val);
    else if (key == "n") {
      m.n = parse_count(key, val);
      spec.n_list = {m.n};
    } else if (key == "dim") {
      if (val == "auto") m.dim_override.reset();
      else m.dim_override = parse_count(key, val);
    } else if (key == "dim_constant") m.dim_constant = parse_real(key, val);
    else if (key == "kappa_constant") m.kappa_constant = parse_real(key, val);
    else if (key == "dt") m.dt = parse_real(key, val);
    else if (key == "particles") m.particles = parse_count(key, val);
    else if (key == "seed") m.seed = parse_count(key, val);
    else if (key == "k0") m.k0 = parse_count(key, val);
    else if (key == "k_max") m.k_max = parse_count(key, val);
    else if (key == "quantile_level") m.quantile_level = parse_real(key, val);
    else if (key == "truth_decay") m.truth_decay = parse_real(key, val);
    else if (key == "prior_decay") {
      if (val == "standard") m.prior_decay = PriorDecay::kStandard;
      else if (val == "half") m.prior_decay = PriorDecay::kHalf;
      else throw InvalidArgument("config: prior_decay must be standard or half");
    } else if (key == "noise_free") m.noise_free = parse_bool(key, val);
    else if (key == "n_list") spec.n_list = parse_count_list(key, val);
    else if (key == "replicates") spec.replicates = parse_count(key, val);
    else if (key == "jobs") spec.jobs = parse_count(key, val);
    else if (key == "grid_points") spec.grid_points = parse_count(key, val);
    else if (key == "truth_dim") spec.truth_dim = parse_count(key, val);
    else if (key == "coverage_coeffs") spec.coverage_coeffs = parse_count(key, val);
    else if (key == "tau") spec.oracle_tau = parse_real(key, val);
    else if (key == "guard") spec.pullback.guard_relative = parse_real(key, val);
    else if (key == "sign_convention") {
      if (val == "roundtrip") spec.pullback.sign = SignConvention::kRoundTrip;
      else if (val == "plus") spec.pullback.sign = SignConvention::kPlus;
      else throw InvalidArgument("config: sign_convention must be roundtrip or plus");
    } else if (key == "out") spec.output_dir = val;
    else if (key == "study") {
      if (val != study_name(spec.study)) throw InvalidArgument("config: file is for study '" + val + "'");
    }
    else throw InvalidArgument("config: unknown key '" + key + "'");
  }
}

/// Every resolved field, one "key = value" per line; parses back to the same spec.
inline std::string resolved_config_text(const ExperimentSpec& spec) {
  const ModelConfig& m = spec.model;
  std::string n_list;
  for (std::size_t i = 0; i < spec.n_list.size(); ++i) n_list += (i ? "," : "") + std::to_string(spec.n_list[i]);
  std::string s;
  auto put = [&](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
  put("study", study_name(spec.study));
  put("alpha", format_number(m.alpha));
  put("p", format_number(m.p));
  put("n_list", n_list);
  put("dim", m.dim_override ? std::to_string(*m.dim_override) : "auto");
  put("dim_constant", format_number(m.dim_constant));
  put("kappa_constant", format_number(m.kappa_constant));
  put("dt", format_number(m.dt));
  put("particles", std::to_string(m.particles));
  put("seed", std::to_string(m.seed));
  put("k0", std::to_string(m.k0));
  put("k_max", std::to_string(m.k_max));
  put("quantile_level", format_number(m.quantile_level));
  put("truth_decay", format_number(m.truth_decay));
  put("prior_decay", m.prior_decay == PriorDecay::kStandard ? "standard" : "half");
  put("noise_free", m.noise_free ? "true" : "false");
  put("replicates", std::to_string(spec.replicates));
  put("grid_points", std::to_string(spec.grid_points));
  put("truth_dim", std::to_string(spec.truth_dim));
  put("coverage_coeffs", std::to_string(spec.coverage_coeffs));
  put("tau", format_number(spec.oracle_tau));
  put("guard", format_number(spec.pullback.guard_relative));
  put("sign_convention", spec.pullback.sign == SignConvention::kRoundTrip ? "roundtrip" : "plus");
  return s;
}

}  // namespace eki
