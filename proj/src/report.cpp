// Copyright 2026 The mhdcascade Authors
// Licensed under the Apache License, Version 2.0. See LICENSE-2.0 at
// https://www.apache.org/licenses/LICENSE-2.0
#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include "mhdc/errors.hpp"
#include "mhdc/harness.hpp"

namespace mhdc {

using nlohmann::json;

bool RunReport::all_pass() const {
  if (!errors.empty()) return false;
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

void RunReport::add_value(const std::string& name, double v, std::optional<double> tol) {
  values.push_back(Measurement{name, v, tol});
}

Table& RunReport::add_table(const std::string& name, std::vector<std::string> columns) {
  tables.push_back(Table{name, std::move(columns), {}});
  return tables.back();
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  throw Error("report_from_json: bad number '" + s + "'");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << body;
  if (!out) throw IoError("write failed for " + p.string());
}

}  // namespace

json report_to_json(const RunReport& r) {
  json j;
  j["experiment"] = r.experiment;
  j["provenance"] = {{"config_hash", r.config_hash}, {"version", r.version}, {"seed", r.seed}};
  json crit = json::array();
  for (const auto& c : r.criteria)
    crit.push_back({{"id", c.id},
                    {"name", c.name},
                    {"pass", c.pass},
                    {"measured", number(c.measured)},
                    {"tolerance", number(c.tolerance)},
                    {"relation", c.relation},
                    {"note", c.note}});
  j["criteria"] = crit;
  json vals = json::array();
  for (const auto& m : r.values)
    vals.push_back({{"name", m.name},
                    {"value", number(m.value)},
                    {"tolerance", m.tolerance ? number(*m.tolerance) : json(nullptr)}});
  j["values"] = vals;
  json tabs = json::array();
  for (const auto& t : r.tables) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json jr = json::array();
      for (double v : row) jr.push_back(number(v));
      rows.push_back(jr);
    }
    tabs.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", rows}});
  }
  j["tables"] = tabs;
  j["errors"] = r.errors;
  j["all_pass"] = r.all_pass();
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.experiment = j.at("experiment").get<std::string>();
  const json& p = j.at("provenance");
  r.config_hash = p.at("config_hash").get<std::string>();
  r.version = p.at("version").get<std::string>();
  r.seed = p.at("seed").get<std::uint64_t>();
  for (const auto& c : j.at("criteria"))
    r.criteria.push_back(Criterion{c.at("id").get<int>(), c.at("name").get<std::string>(), c.at("pass").get<bool>(),
                                   read_number(c.at("measured")), read_number(c.at("tolerance")),
                                   c.at("relation").get<std::string>(), c.at("note").get<std::string>()});
  for (const auto& m : j.at("values")) {
    Measurement x{m.at("name").get<std::string>(), read_number(m.at("value")), std::nullopt};
    if (!m.at("tolerance").is_null()) x.tolerance = read_number(m.at("tolerance"));
    r.values.push_back(x);
  }
  for (const auto& t : j.at("tables")) {
    Table tab{t.at("name").get<std::string>(), t.at("columns").get<std::vector<std::string>>(), {}};
    for (const auto& row : t.at("rows")) {
      std::vector<double> v;
      for (const auto& x : row) v.push_back(read_number(x));
      tab.rows.push_back(v);
    }
    r.tables.push_back(tab);
  }
  r.errors = j.at("errors").get<std::vector<std::string>>();
  return r;
}

std::string report_json_text(const RunReport& r) { return report_to_json(r).dump(2) + "\n"; }

std::string criteria_csv(const RunReport& r) {
  std::string out = "id,name,pass,measured,tolerance,relation,note\n";
  for (const auto& c : r.criteria)
    out += std::to_string(c.id) + "," + csv_field(c.name) + "," + (c.pass ? "1" : "0") + "," +
           format_number(c.measured) + "," + format_number(c.tolerance) + "," + csv_field(c.relation) + "," +
           csv_field(c.note) + "\n";
  return out;
}

std::string table_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_field(t.columns[i]);
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
    out += "\n";
  }
  return out;
}

std::vector<std::string> emit(const RunReport& r, EmitFormat format, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  const std::filesystem::path base(dir);
  std::vector<std::string> written;
  if (format == EmitFormat::Json) {
    const auto p = base / (r.experiment + ".json");
    write_file(p, report_json_text(r));
    written.push_back(p.string());
    return written;
  }
  const auto pc = base / (r.experiment + "_criteria.csv");
  write_file(pc, criteria_csv(r));
  written.push_back(pc.string());
  for (const auto& t : r.tables) {
    const auto p = base / (r.experiment + "_" + t.name + ".csv");
    write_file(p, table_csv(t));
    written.push_back(p.string());
  }
  return written;
}

std::vector<std::string> compare_output_dirs(const std::string& a, const std::string& b) {
  namespace fs = std::filesystem;
  auto listing = [](const std::string& root) {
    std::set<std::string> out;
    if (!fs::exists(root)) return out;
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) out.insert(fs::relative(e.path(), root).string());
    return out;
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  const auto la = listing(a), lb = listing(b);
  std::set<std::string> all(la);
  all.insert(lb.begin(), lb.end());
  std::vector<std::string> diff;
  for (const auto& rel : all) {
    if (!la.count(rel) || !lb.count(rel) || slurp(fs::path(a) / rel) != slurp(fs::path(b) / rel))
      diff.push_back(rel);
  }
  return diff;
}

}  // namespace mhdc
