// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
//
// Acceptance runner: executes the six experiments from their configuration
// files, re-judges every criterion against the tolerances pinned below and
// prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <algorithm>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mhdc/harness.hpp"

namespace {

struct Pinned {
  int id;
  const char* experiment;
  const char* relation;
  double tolerance;
  double budget_s;  ///< runtime budget of this criterion
};

// Tolerances and runtime budgets of criteria 1..9.
const std::vector<Pinned> kPinned = {
    {1, "E1", "==", 0.0, 1.0},       {2, "E1", "<=", 1e-12, 5.0},    {3, "E2", "<=", 1e-12, 30.0},
    {4, "E3", "<=", 1e-8, 300.0},    {5, "E3", "decreasing", 0.2, 1200.0}, {6, "E3", "<=", 1e-6, 1.0},
    {7, "E4", ">=", 0.05, 300.0},    {8, "E5", ">=", 3.5, 300.0},    {9, "E6", "<=", 0.5, 600.0},
};

const std::map<std::string, std::string> kConfigFile = {
    {"E1", "e1_geometry.cfg"}, {"E2", "e2_operators.cfg"}, {"E3", "e3_cascade.cfg"},
    {"E4", "e4_probe.cfg"},    {"E5", "e5_residual.cfg"},   {"E6", "e6_corrector.cfg"},
};


constexpr double kProbeHi = 20.0;
constexpr double kHeatTol = 1e-10;
constexpr double kFixedPointTol = 1e-6;

bool judged(const std::string& relation, double measured, double tol) {
  if (relation == "==") return measured == tol;
  if (relation == "<=" || relation == "decreasing") return measured <= tol;
  if (relation == ">=") return measured >= tol;
  return false;
}

const mhdc::Criterion* find(const mhdc::RunReport& r, int id) {
  for (const auto& c : r.criteria)
    if (c.id == id) return &c;
  return nullptr;
}

std::optional<double> value(const mhdc::RunReport& r, const std::string& name) {
  for (const auto& v : r.values)
    if (v.name == name) return v.value;
  return std::nullopt;
}

struct Timed {
  mhdc::RunReport report;
  double seconds = 0.0;
};

Timed run_one(const std::string& dir, const std::string& id, const std::string& out) {
  mhdc::Config cfg = mhdc::Config::parse_file((std::filesystem::path(dir) / kConfigFile.at(id)).string());
  cfg.set("out", out);
  const mhdc::ExperimentConfig ec = mhdc::experiment_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  Timed t;
  t.report = mhdc::run(ec).at(0);
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return t;
}

double budget_of(const std::string& experiment) {
  double s = 0.0;
  for (const auto& p : kPinned)
    if (p.experiment == experiment) s += p.budget_s;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string configs = "configs";
  std::string work = (std::filesystem::temp_directory_path() / "mhdc_acceptance").string();
  std::vector<std::string> only;
  app.add_option("--configs", configs, "directory holding the experiment configurations");
  app.add_option("--work", work, "scratch output directory");
  app.add_option("--only", only, "experiments to run (default all)");
  CLI11_PARSE(app, argc, argv);

  std::vector<std::string> ids = {"E1", "E2", "E3", "E4", "E5", "E6"};
  if (!only.empty()) ids = only;
  std::filesystem::remove_all(work);
  const std::string first = (std::filesystem::path(work) / "first").string();
  const std::string second = (std::filesystem::path(work) / "second").string();

  std::map<std::string, Timed> runs;
  for (const auto& id : ids) {
    try {
      runs[id] = run_one(configs, id, first);
    } catch (const std::exception& e) {
      std::cout << id << " could not start: " << e.what() << "\n";
    }
  }

  bool all = true;
  for (const auto& p : kPinned) {
    const std::string exp = p.experiment;
    if (std::find(ids.begin(), ids.end(), exp) == ids.end()) continue;
    bool pass = false;
    double measured = std::nan("");
    std::string note = "experiment did not run";
    double secs = std::nan("");
    const double budget = budget_of(exp);
    if (runs.count(exp)) {
      const Timed& t = runs.at(exp);
      secs = t.seconds;
      const mhdc::Criterion* c = find(t.report, p.id);
      if (c) {
        measured = c->measured;
        note = c->note;
        pass = c->pass && judged(p.relation, measured, p.tolerance) && t.seconds <= budget;
        if (p.id == 7) {
          bool rows = false;
          for (const auto& tab : t.report.tables)
            if (tab.name == "probe")
              for (const auto& row : tab.rows) {
                rows = true;
                pass = pass && row[2] >= p.tolerance && row[2] <= kProbeHi && row[3] >= p.tolerance && row[3] <= kProbeHi;
              }
          pass = pass && rows;
        }
        if (p.id == 8) {
          const auto h = value(t.report, "heat_only.residual");
          pass = pass && h && *h <= kHeatTol;
        }
        if (p.id == 9) {
          const auto f = value(t.report, "fixed_point_residual");
          pass = pass && f && *f <= kFixedPointTol;
        }
      } else {
        note = "criterion missing from the report";
      }
    }
    all = all && pass;
    std::cout << "criterion " << p.id << ": " << (pass ? "PASS" : "FAIL") << "  measured "
              << mhdc::format_number(measured) << " " << p.relation << " " << mhdc::format_number(p.tolerance)
              << (p.id == 7 ? " (band upper end " + mhdc::format_number(kProbeHi) + ")" : "") << "  time "
              << mhdc::format_number(std::round(secs * 100.0) / 100.0) << " s of " << mhdc::format_number(budget)
              << " s  [" << note << "]\n";
  }

  // Determinism: repeat every experiment into a second directory and compare bytes.
  {
    std::vector<std::string> diffs;
    bool ran = false;
    for (const auto& id : ids) {
      if (!runs.count(id)) continue;
      ran = true;
      try {
        run_one(configs, id, second);
      } catch (const std::exception& e) {
        diffs.push_back(id + ": " + e.what());
        continue;
      }
      for (const auto& d : mhdc::compare_output_dirs((std::filesystem::path(first) / id).string(),
                                                     (std::filesystem::path(second) / id).string()))
        diffs.push_back(id + "/" + d);
    }
    const bool pass = ran && diffs.empty();
    all = all && pass;
    std::cout << "criterion 10: " << (pass ? "PASS" : "FAIL") << "  differing files " << diffs.size();
    for (const auto& d : diffs) std::cout << " " << d;
    std::cout << (ran ? "" : " (nothing repeated)") << "\n";
  }

  // Informational desk surrogates; never counted.
  auto info = [&](const std::string& id, const std::vector<std::string>& names) {
    if (!runs.count(id)) return;
    for (const auto& n : names)
      if (const auto v = value(runs.at(id).report, n)) std::cout << "info " << id << " " << n << " = " << mhdc::format_number(*v) << "\n";
    for (const auto& e : runs.at(id).report.errors) std::cout << "info " << id << " blocked: " << e << "\n";
  };
  info("E3", {"surrogate.A", "surrogate.cascade.discrepancy_u", "surrogate.cascade.discrepancy_B"});
  info("E4", {"surrogate.A", "surrogate.critical.coefficient"});
  if (runs.count("E4"))
    for (const auto& t : runs.at("E4").report.tables)
      if (t.name == "surrogate_probe")
        for (const auto& row : t.rows)
          std::cout << "info E4 surrogate probe n = " << row[0] << ": sqrt(t) sup|vbar| = " << mhdc::format_number(row[2])
                    << ", sqrt(t) sup|hbar| = " << mhdc::format_number(row[3]) << "\n";
  info("E6", {"surrogate.A", "surrogate.fixed_point_residual", "surrogate.end_to_end_residual", "surrogate.monotone"});
  if (runs.count("E6"))
    for (const auto& t : runs.at("E6").report.tables)
      if (t.name == "surrogate.picard")
        for (const auto& row : t.rows)
          std::cout << "info E6 surrogate iterate " << row[0] << ": distance " << mhdc::format_number(row[1])
                    << ", ratio " << mhdc::format_number(row[2]) << "\n";

  std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << "\n";
  return all ? 0 : 1;
}
