// Copyright 2026 The qfi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qfi/cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace qfi::cli {

using nlohmann::json;

namespace {

// NaN compares equal to NaN so that reports round-trip.
bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same_map(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
  if (a.size() != b.size()) return false;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first || !same(ia->second, ib->second)) return false;
  }
  return true;
}

json number_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

json map_json(const std::map<std::string, double>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[k] = number_json(v);
  return out;
}

std::map<std::string, double> map_from(const json& j) {
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) out[k] = number_from(v);
  return out;
}

}  // namespace

bool Verdict::operator==(const Verdict& o) const {
  return status == o.status && same_map(residuals, o.residuals);
}

bool Table::operator==(const Table& o) const {
  if (columns != o.columns || rows.size() != o.rows.size()) return false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != o.rows[i].size()) return false;
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (!same(rows[i][j], o.rows[i][j])) return false;
    }
  }
  return true;
}

bool RunReport::operator==(const RunReport& o) const {
  return scenario == o.scenario && same_map(scalars, o.scalars) && verdicts == o.verdicts &&
         table == o.table && same(wall_time_s, o.wall_time_s) && version == o.version &&
         config_hash == o.config_hash;
}

json to_json(const RunReport& r) {
  json out;
  out["scenario"] = r.scenario;
  out["scalars"] = map_json(r.scalars);
  json verdicts = json::object();
  for (const auto& [name, v] : r.verdicts) {
    verdicts[name] = {{"status", v.status}, {"residuals", map_json(v.residuals)}};
  }
  out["verdicts"] = std::move(verdicts);
  json rows = json::array();
  for (const auto& row : r.table.rows) {
    json jr = json::array();
    for (double v : row) jr.push_back(number_json(v));
    rows.push_back(std::move(jr));
  }
  out["table"] = {{"columns", r.table.columns}, {"rows", std::move(rows)}};
  out["wall_time_s"] = number_json(r.wall_time_s);
  out["version"] = r.version;
  out["config_hash"] = r.config_hash;
  return out;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.scenario = j.at("scenario");
  r.scalars = map_from(j.at("scalars"));
  for (const auto& [name, v] : j.at("verdicts").items()) {
    Verdict vd;
    vd.status = v.at("status").get<std::string>();
    vd.residuals = map_from(v.at("residuals"));
    r.verdicts[name] = std::move(vd);
  }
  r.table.columns = j.at("table").at("columns").get<std::vector<std::string>>();
  for (const auto& row : j.at("table").at("rows")) {
    std::vector<double> values;
    for (const auto& v : row) values.push_back(number_from(v));
    r.table.rows.push_back(std::move(values));
  }
  r.wall_time_s = number_from(j.at("wall_time_s"));
  r.version = j.at("version").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  return r;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(const Table& table, std::ostream& out) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

}  // namespace qfi::cli
