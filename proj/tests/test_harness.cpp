// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "mhdc/errors.hpp"
#include "mhdc/harness.hpp"

using namespace mhdc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("mhdc_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunReport sample_report() {
  RunReport r;
  r.experiment = "E2";
  r.seed = 99;
  r.config_hash = "0123456789abcdef";
  r.version = "test";
  r.criteria.push_back({3, "identities", true, 1.5e-16, 1e-12, "<=", "ok"});
  r.criteria.push_back({5, "ladder", false, std::numeric_limits<double>::quiet_NaN(), 0.2, "decreasing", "blocked"});
  r.add_value("a", 0.1, 1e-3);
  r.add_value("b", std::numeric_limits<double>::infinity());
  r.add_value("c", -std::numeric_limits<double>::infinity());
  Table& t = r.add_table("rows", {"x", "y"});
  t.rows = {{1.0, 2.0 / 3.0}, {1e-300, -5.0}};
  r.errors.push_back("something failed");
  return r;
}

}  // namespace

TEST(Config, ParsesDefaultsIncludesAndComments) {
  const fs::path d = scratch("cfg");
  fs::create_directories(d / "sub");
  write(d / "sub" / "base.cfg", "# base\nseed = 7\ncascade.A = 4\n");
  write(d / "main.cfg", "include sub/base.cfg\nexperiment = E1   # trailing\ncascade.A = 8\n\n");
  const Config c = Config::parse_file((d / "main.cfg").string());
  EXPECT_EQ(c.get_int("seed"), 7);
  EXPECT_EQ(c.get_int("cascade.A"), 8);
  EXPECT_EQ(c.get_string("experiment"), "E1");
  EXPECT_EQ(c.get_double("tol.identity"), 1e-8);
  EXPECT_FALSE(c.get_optional_double("time.lo").has_value());
  EXPECT_EQ(c.get_int_list("ladder.A"), (std::vector<long>{4, 8, 16}));
}

TEST(Config, UnknownKeyNamesFileAndLine) {
  try {
    Config::parse_text("seed = 1\n\nbogus.key = 3\n", "x.cfg");
    FAIL() << "no exception";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("x.cfg:3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("bogus.key"), std::string::npos);
  }
  EXPECT_THROW(Config::parse_text("seed\n", "y.cfg"), ConfigError);
  EXPECT_THROW(Config::parse_text("seed = abc\n", "z.cfg").get_int("seed"), ConfigError);
  Config c;
  EXPECT_THROW(c.set("nope", "1"), ConfigError);
}

TEST(Config, HashIgnoresOutputDirectoryOnly) {
  Config a = Config::parse_text("experiment = E1\n", "a");
  Config b = a;
  b.set("out", "/elsewhere");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  b.set("seed", "5");
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Config, UnknownExperimentRejected) {
  Config c = Config::parse_text("experiment = E9\n", "a");
  EXPECT_THROW(experiment_config(c), ConfigError);
  c.set("experiment", "E3");
  EXPECT_EQ(experiment_config(c).id, "E3");
  EXPECT_EQ(experiment_of("no-such-command"), "");
}

TEST(Report, JsonRoundTrip) {
  const RunReport r = sample_report();
  const std::string text = report_json_text(r);
  const RunReport back = report_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(report_json_text(back), text);
  EXPECT_TRUE(std::isnan(back.criteria[1].measured));
  EXPECT_EQ(back.values[1].value, std::numeric_limits<double>::infinity());
  EXPECT_FALSE(back.values[1].tolerance.has_value());
  EXPECT_EQ(back.tables[0].rows[0][1], 2.0 / 3.0);
  EXPECT_FALSE(back.all_pass());
}

TEST(Report, NumberFormatting) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(2.0 / 3.0), "0.6666666666666666");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(std::stod(format_number(1e-300)), 1e-300);
}

TEST(Report, EmptyReportWritesHeaderOnlyFiles) {
  const fs::path d = scratch("empty");
  RunReport r;
  r.experiment = "E1";
  r.add_table("t", {"a", "b"});
  const auto paths = emit(r, EmitFormat::Csv, d.string());
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(slurp(d / "E1_criteria.csv"), criteria_csv(r));
  const std::string crit = slurp(d / "E1_criteria.csv");
  EXPECT_EQ(std::count(crit.begin(), crit.end(), '\n'), 1);
  EXPECT_EQ(slurp(d / "E1_t.csv"), "a,b\n");
  emit(r, EmitFormat::Json, d.string());
  EXPECT_TRUE(fs::exists(d / "E1.json"));
}

TEST(Report, CompareDirectories) {
  const fs::path a = scratch("cmp_a"), b = scratch("cmp_b");
  write(a / "x.txt", "1");
  write(b / "x.txt", "1");
  EXPECT_TRUE(compare_output_dirs(a.string(), b.string()).empty());
  write(b / "x.txt", "2");
  write(a / "only.txt", "");
  const auto d = compare_output_dirs(a.string(), b.string());
  EXPECT_EQ(d.size(), 2u);
}

TEST(Memory, GuardThrowsAboveCap) {
  const TorusGrid g(3, 64);
  EXPECT_EQ(tensor_bytes(g), 9.0 * 64 * 64 * 33 * 16);
  EXPECT_NO_THROW(require_memory(cascade_bytes(g, 1), 3000.0, "x"));
  EXPECT_THROW(require_memory(cascade_bytes(TorusGrid(3, 1024), 1), 3000.0, "x"), MemoryBudgetExceeded);
  EXPECT_GT(cascade_bytes(g, 2), cascade_bytes(g, 1));
}

TEST(Experiments, SameSeedGivesIdenticalBytes) {
  for (const std::string id : {"E1", "E2"}) {
    Config c = Config::parse_text("experiment = " + id + "\ngeometry.samples = 200\n", "t");
    const fs::path a = scratch("det_a_" + id), b = scratch("det_b_" + id);
    c.set("out", a.string());
    const RunReport ra = run(experiment_config(c)).at(0);
    c.set("out", b.string());
    run(experiment_config(c));
    EXPECT_TRUE(compare_output_dirs(a.string(), b.string()).empty()) << id;
    EXPECT_TRUE(fs::exists(a / id / (id + ".json")));
    EXPECT_TRUE(ra.all_pass()) << id;
  }
}

TEST(Experiments, SubcommandsMapToExperiments) {
  for (const auto& s : subcommands()) {
    const std::string e = experiment_of(s);
    if (s == "plan" || s == "run")
      EXPECT_EQ(e, "") << s;
    else
      EXPECT_TRUE(e.size() == 2 && e[0] == 'E' && e[1] >= '1' && e[1] <= '6') << s;
  }
}
