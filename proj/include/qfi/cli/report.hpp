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

#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace qfi::cli {

struct Verdict {
  std::string status = "n.a.";  // pass | fail | n.a.
  std::map<std::string, double> residuals;
  bool operator==(const Verdict& o) const;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  bool operator==(const Table& o) const;
};

struct RunReport {
  nlohmann::json scenario;
  std::map<std::string, double> scalars;
  std::map<std::string, Verdict> verdicts;
  Table table;
  double wall_time_s = 0.0;
  std::string version;
  std::string config_hash;
  bool operator==(const RunReport& o) const;
};

/// Keys sorted; non-finite numbers become null.
nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

/// Header row plus one line per row, LF endings, %.17g numbers.
void write_csv(const Table& table, std::ostream& out);
std::string format_number(double v);

}  // namespace qfi::cli
