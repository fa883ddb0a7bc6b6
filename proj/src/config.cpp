// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mhdc/errors.hpp"
#include "mhdc/harness.hpp"

namespace mhdc {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"experiment", "run", "E1..E6, or run for all experiments"},
      {"seed", "1234", "seed of every random choice"},
      {"out", "out", "output directory"},
      {"memory_cap_mb", "3000", "refuse grids whose estimated working set exceeds this many MiB"},
      // cascade parameters
      {"cascade.d", "3", "dimension"},
      {"cascade.A", "2", "base of the frequency ladder"},
      {"cascade.b", "2", "growth exponent"},
      {"cascade.gamma", "auto", "cutoff exponent, auto for the default choice"},
      {"cascade.m_star", "3", "common denominator of the direction sets"},
      {"cascade.k_max", "1", "depth of the cascade"},
      {"cascade.J_d", "22", "number of working directions"},
      {"cascade.factor", "4", "ratio standing in for a strict scale separation"},
      {"grid.n", "64", "points per axis of the reference build"},
      {"delta0", "1", "cylinder radius parameter, auto for the computed value"},
      {"ladder.A", "4,8,16", "A values of the cascade ladder"},
      {"time.lo", "auto", "lower end of sampled time windows"},
      {"time.hi", "auto", "upper end of sampled time windows"},
      // E1
      {"geometry.samples", "1000", "random coupled inputs inside the certified ball"},
      // E2
      {"ops.n", "32", "grid of the operator identity suite"},
      {"ops.band", "10", "band of the random test fields"},
      {"ops.duhamel_samples", "200", "random (|k|^2, mu, t) triples for the quadrature comparison"},
      // E3
      {"cascade.t", "1", "time of the cascade step comparison"},
      {"cascade.k", "0", "level of the cascade step comparison"},
      {"cascade.grid", "auto", "grid of the ladder builds, auto for the smallest resolving grid"},
      {"identity.A", "8", "A of the amplitude identity check"},
      {"identity.n", "64", "grid of the amplitude identity check"},
      {"separation.d", "2", "dimension of the separation table plan"},
      {"separation.A", "2", "A of the separation table plan"},
      {"separation.b", "2", "b of the separation table plan"},
      {"separation.m_star", "15", "m_star of the separation table plan"},
      {"separation.k", "1", "level of the separation table"},
      {"separation.t", "1", "time of the separation table"},
      {"prop51.times", "0.01,0.1,1,2", "sample times of the stress recovery report"},
      // E4
      {"probe.A", "8", "A of the blowup probe"},
      {"probe.k_max", "2", "depth of the blowup probe"},
      {"probe.lo", "0.05", "lower end of the probe band"},
      {"probe.hi", "20", "upper end of the probe band"},
      {"probe.grid", "auto", "grid of the probe build, auto for the smallest resolving grid"},
      // E5
      {"forcing.per_octave", "4", "forcing samples per octave over [t_kmax, 4]"},
      {"residual.refinements", "16,32,64", "time samples per octave of the residual stencils"},
      {"residual.centre_spacing", "1.4142135623730951", "ratio between residual centre times"},
      {"residual.t_hi", "2", "largest residual centre time"},
      {"heat.n", "32", "grid of the heat-only exact case"},
      {"heat.band", "1", "band of the heat-only initial data"},
      {"heat.refinement", "128", "samples per octave of the heat-only case"},
      // E6
      {"corrector.A", "8", "A of the corrector reference configuration"},
      {"corrector.n", "32", "grid of the corrector"},
      {"corrector.source_n", "64", "grid of the principal pair before resampling, auto for corrector.n"},
      {"corrector.iterates", "10", "Picard iterates"},
      {"corrector.t_start", "0.25", "start of the corrector window"},
      {"corrector.horizon", "0.5", "end of the corrector window"},
      {"corrector.steps_per_octave", "16", "step grid density"},
      {"corrector.norm_per_octave", "1", "norm sample density"},
      {"corrector.alpha", "0.05", "weight exponent"},
      {"corrector.kappa", "0.1", "Hoelder exponent"},
      {"corrector.lag", "8", "Hoelder lag window in cells"},
      {"corrector.cfl", "0.5", "advective step limit"},
      {"corrector.N0", "1", "rescaling factor of the assembled solution"},
      {"background", "zero", "zero or beltrami"},
      {"background.a", "0", "velocity amplitude of the beltrami background"},
      {"background.b", "0", "magnetic amplitude of the beltrami background"},
      // surrogates
      {"surrogate.A", "2", "A of the informational desk surrogate"},
      {"surrogate.n", "64", "grid of the informational desk surrogate"},
      // tolerances
      {"tol.geometry", "1e-12", "reconstruction error of the coupled decomposition"},
      {"tol.ops", "1e-12", "relative error of the operator identities"},
      {"tol.duhamel", "1e-12", "relative error against quadrature"},
      {"tol.identity", "1e-8", "relative amplitude identity residual"},
      {"tol.cascade", "0.2", "final cascade discrepancy"},
      {"tol.diag", "1e-6", "defect of the diagonal separation value"},
      {"tol.order", "3.5", "temporal order of the forced residual"},
      {"tol.heat", "1e-10", "residual of the heat-only exact case"},
      {"tol.ratio", "0.5", "successive Picard ratio"},
      {"tol.fixed_point", "1e-6", "relative fixed point residual"},
  };
  return keys;
}

namespace {

const ConfigKey* find_key(const std::string& k) {
  for (const auto& c : config_keys())
    if (c.key == k) return &c;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Config Config::parse_file(const std::string& path) {
  Config c;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto parent = std::filesystem::path(path).parent_path().string();
  c.parse_into(ss.str(), path, parent.empty() ? "." : parent, 0);
  return c;
}

Config Config::parse_text(const std::string& text, const std::string& source, const std::string& base_dir) {
  Config c;
  c.parse_into(text, source, base_dir, 0);
  return c;
}

void Config::parse_into(const std::string& text, const std::string& source, const std::string& base_dir,
                        int depth) {
  if (depth > 16) throw ConfigError(source + ": include nesting deeper than 16");
  std::stringstream ss(text);
  std::string line;
  int no = 0;
  while (std::getline(ss, line)) {
    ++no;
    const std::string t = trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    const std::string at = source + ":" + std::to_string(no);
    if (t.rfind("include", 0) == 0 && (t.size() == 7 || t[7] == ' ' || t[7] == '\t')) {
      const std::string rel = trim(t.substr(7));
      if (rel.empty()) throw ConfigError(at + ": include without a path");
      std::filesystem::path p(rel);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      std::ifstream in(p);
      if (!in) throw ConfigError(at + ": cannot open included file " + p.string());
      std::stringstream inc;
      inc << in.rdbuf();
      const auto parent = p.parent_path().string();
      parse_into(inc.str(), p.string(), parent.empty() ? "." : parent, depth + 1);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(at + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(at + ": empty key");
    if (!find_key(key)) throw ConfigError(at + ": unknown key '" + key + "'");
    set(key, value, source, no);
  }
}

void Config::set(const std::string& key, const std::string& value, const std::string& source, int line) {
  if (!find_key(key)) throw ConfigError("unknown key '" + key + "'");
  entries_[key] = Entry{value, source, line};
}

std::string Config::raw(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it != entries_.end()) return it->second.value;
  const ConfigKey* k = find_key(key);
  if (!k) throw ConfigError("unknown key '" + key + "'");
  return k->default_value;
}

std::string Config::where(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return "key '" + key + "' (default)";
  return "key '" + key + "' (" + it->second.source + ":" + std::to_string(it->second.line) + ")";
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

long Config::get_int(const std::string& key) const {
  const std::string v = raw(key);
  long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(where(key) + ": expected an integer, got '" + v + "'");
  return out;
}

double Config::get_double(const std::string& key) const {
  const std::string v = raw(key);
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError(where(key) + ": expected a number, got '" + v + "'");
  return out;
}

bool Config::get_bool(const std::string& key) const {
  const std::string v = raw(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(where(key) + ": expected true or false, got '" + v + "'");
}

std::optional<double> Config::get_optional_double(const std::string& key) const {
  if (raw(key) == "auto") return std::nullopt;
  return get_double(key);
}

std::vector<long> Config::get_int_list(const std::string& key) const {
  std::vector<long> out;
  for (const std::string& s : split_list(raw(key))) {
    long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError(where(key) + ": bad list entry '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(where(key) + ": empty list");
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& s : split_list(raw(key))) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError(where(key) + ": bad list entry '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(where(key) + ": empty list");
  return out;
}

std::string Config::canonical() const {
  std::set<std::string> names;
  for (const auto& k : config_keys()) names.insert(k.key);
  std::string out;
  for (const auto& k : names) {
    if (k == "out") continue;
    out += k + "=" + raw(k) + "\n";
  }
  return out;
}

std::string Config::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

}  // namespace mhdc
