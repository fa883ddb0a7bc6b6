// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mhdc/scales.hpp"
#include "mhdc/spectral.hpp"

namespace mhdc {

// ----------------------------------------------------------------------------
// Configuration

/// Documented configuration key with its default value.
struct ConfigKey {
  std::string key;
  std::string default_value;
  std::string help;
};

/// Every recognised key. Keys absent from a file take these defaults.
const std::vector<ConfigKey>& config_keys();

/// Flat key = value file. Lines starting with '#' are comments and
/// `include PATH` splices another file (relative to the including file).
/// Later assignments override earlier ones.
class Config {
 public:
  struct Entry {
    std::string value;
    std::string source;  ///< file name, or "<cli>" for overrides
    int line = 0;
  };

  static Config parse_file(const std::string& path);
  /// `base_dir` resolves relative include paths.
  static Config parse_text(const std::string& text, const std::string& source, const std::string& base_dir = ".");

  void set(const std::string& key, const std::string& value, const std::string& source = "<cli>", int line = 0);
  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  /// Empty when the value is "auto".
  std::optional<double> get_optional_double(const std::string& key) const;
  std::vector<long> get_int_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  /// Every recognised key with its effective value, one "key=value" line each, sorted.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;

  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  void parse_into(const std::string& text, const std::string& source, const std::string& base_dir, int depth);
  std::string raw(const std::string& key) const;
  std::string where(const std::string& key) const;

  std::map<std::string, Entry> entries_;
};

std::uint64_t fnv1a64(const std::string& s);

// ----------------------------------------------------------------------------
// Reports

/// One acceptance criterion judged inside an experiment.
struct Criterion {
  int id = 0;
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string relation;  ///< "<=", ">=", "==" or "decreasing"
  std::string note;
};

/// A measured value with the tolerance it is judged against (absent when
/// the value is informational).
struct Measurement {
  std::string name;
  double value = 0.0;
  std::optional<double> tolerance;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct RunReport {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string version;
  std::vector<Criterion> criteria;
  std::vector<Measurement> values;
  std::vector<Table> tables;
  std::vector<std::string> errors;

  bool all_pass() const;
  void add_value(const std::string& name, double v, std::optional<double> tol = std::nullopt);
  Table& add_table(const std::string& name, std::vector<std::string> columns);
};

nlohmann::json report_to_json(const RunReport& r);
RunReport report_from_json(const nlohmann::json& j);
std::string report_json_text(const RunReport& r);
/// CSV of the criteria (one row per criterion) and of one table.
std::string criteria_csv(const RunReport& r);
std::string table_csv(const Table& t);
/// Shortest round-trip decimal with '.' separator; "nan", "inf", "-inf" otherwise.
std::string format_number(double v);

enum class EmitFormat { Json, Csv };

/// Writes <dir>/<experiment>.json or <dir>/<experiment>_criteria.csv plus one
/// <dir>/<experiment>_<table>.csv per table. Returns the written paths.
std::vector<std::string> emit(const RunReport& r, EmitFormat format, const std::string& dir);

/// Byte comparison of every regular file in two directories (recursively).
/// Returns the relative paths that differ or exist on one side only.
std::vector<std::string> compare_output_dirs(const std::string& a, const std::string& b);

// ----------------------------------------------------------------------------
// Experiments

struct ExperimentConfig {
  std::string id;  ///< E1..E6, or "run" for all of them
  CascadeParams params;
  int grid_n = 64;
  std::vector<long> ladder;
  std::optional<double> t_lo, t_hi;
  std::map<std::string, double> tolerances;
  std::string out_dir = "out";
  std::uint64_t seed = 1234;
  double memory_cap_mb = 3000.0;
  Config raw;
};

/// Validates the experiment id and reads the common keys. Throws ConfigError.
ExperimentConfig experiment_config(const Config& c);

/// Subcommand names in CLI order, and the experiment each belongs to.
const std::vector<std::string>& subcommands();
std::string experiment_of(const std::string& subcommand);

/// Runs one subcommand (a part of an experiment) into a fresh report.
RunReport run_subcommand(const std::string& name, const ExperimentConfig& cfg);
/// Runs one experiment E1..E6. Failures inside are recorded, never thrown.
RunReport run_experiment(const std::string& id, const ExperimentConfig& cfg);
/// Runs cfg.id (all six experiments for "run"), writing JSON and CSV under
/// <out>/<experiment>/.
std::vector<RunReport> run(const ExperimentConfig& cfg);

/// Bytes of one spectral tensor on the grid.
double tensor_bytes(const TorusGrid& g);
/// Estimated peak bytes of building the cascade on the grid.
double cascade_bytes(const TorusGrid& g, int k_max);
/// Throws MemoryBudgetExceeded when `bytes` exceeds the cap.
void require_memory(double bytes, double cap_mb, const std::string& what);
/// Smallest even n whose band holds every carrier plus its cutoff harmonics.
int required_grid(const ScalePlan& plan);

}  // namespace mhdc
