// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mhdc/errors.hpp"
#include "mhdc/harness.hpp"
#include "mhdc/kernels.hpp"

namespace {

std::string keys_help() {
  std::string s = "Configuration keys (key = default: description):\n";
  for (const auto& k : mhdc::config_keys()) s += "  " + k.key + " = " + k.default_value + ": " + k.help + "\n";
  return s;
}

void print_summary(const mhdc::RunReport& r) {
  for (const auto& c : r.criteria)
    std::cout << r.experiment << " criterion " << c.id << " (" << c.name << "): " << (c.pass ? "PASS" : "FAIL")
              << " measured " << mhdc::format_number(c.measured) << " " << c.relation << " "
              << mhdc::format_number(c.tolerance) << (c.note.empty() ? "" : "; " + c.note) << "\n";
  for (const auto& e : r.errors) std::cout << r.experiment << " error: " << e << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification harness for a convex-integration MHD cascade"};
  app.footer(keys_help());
  app.require_subcommand(1);

  std::string config_path, out_dir;
  long seed = -1;
  std::vector<std::string> overrides;
  std::string format = "both";
  for (const auto& name : mhdc::subcommands()) {
    CLI::App* sub = app.add_subcommand(name, name == "run" ? "run every configured experiment" : "run " + name);
    sub->add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides key out)");
    sub->add_option("--seed", seed, "random seed (overrides key seed)");
    sub->add_option("--set", overrides, "extra key=value overrides");
    sub->add_option("--format", format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
  }
  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    mhdc::Config cfg = mhdc::Config::parse_file(config_path);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw mhdc::ConfigError("--set expects key=value, got '" + o + "'");
      cfg.set(o.substr(0, eq), o.substr(eq + 1));
    }
    if (!out_dir.empty()) cfg.set("out", out_dir);
    if (seed >= 0) cfg.set("seed", std::to_string(seed));
    const mhdc::ExperimentConfig ec = mhdc::experiment_config(cfg);
    std::cerr << "kernels: " << mhdc::kernels::backend_name(mhdc::kernels::active_backend()) << "\n";

    bool ok = true;
    if (name == "run") {
      for (const auto& r : mhdc::run(ec)) {
        print_summary(r);
        ok = ok && r.all_pass();
      }
    } else {
      const mhdc::RunReport r = mhdc::run_subcommand(name, ec);
      const std::string dir = (std::filesystem::path(ec.out_dir) / name).string();
      if (format != "csv") mhdc::emit(r, mhdc::EmitFormat::Json, dir);
      if (format != "json") mhdc::emit(r, mhdc::EmitFormat::Csv, dir);
      if (name == "plan") std::cout << mhdc::plan_csv(mhdc::build_plan(ec.params));
      print_summary(r);
      ok = r.all_pass();
    }
    return ok ? 0 : 1;
  } catch (const mhdc::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
}
