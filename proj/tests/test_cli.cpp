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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include <json.hpp>

#include "qfi/cli/config.hpp"
#include "qfi/cli/report.hpp"
#include "qfi/cli/runner.hpp"

using namespace qfi;
using namespace qfi::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("qfi_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }

  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = path_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p.string();
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kDephasing = R"({
  "kind": "dephasing",
  "parameters": {"gamma": 1.0, "T": 1.0, "N": 512, "x": 0.0},
  "operators": {"h0": "pauli_z", "jump": "pauli_z"},
  "states": {"psi": "plus_x"}
})";

const char* kTransducer = R"({
  "kind": "transducer",
  "parameters": {"x": 0.0, "T": 1.0, "eps": 0.5},
  "operators": {"h0": "pauli_z", "flip": "pauli_x"},
  "states": {"psi": "zero", "env": "plus_x"}
})";

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  FAIL("missing column " << name);
  return 0;
}

}  // namespace

TEST_CASE("config parsing and canonical round trip") {
  const ScenarioConfig c = parse_config(kDephasing);
  CHECK(c.kind == Kind::dephasing);
  CHECK(c.parameters.N == 512L);
  CHECK(c.operators.at("h0").preset == "pauli_z");
  const ScenarioConfig again = parse_config(serialize(c));
  CHECK(again == c);
  CHECK(config_hash(again) == config_hash(c));
  CHECK(config_hash(c).size() == 16);

  ScenarioConfig changed = c;
  set_parameter(changed, "gamma", 2.0);
  CHECK(changed.parameters.gamma == 2.0);
  CHECK(config_hash(changed) != config_hash(c));
}

TEST_CASE("config round trip with explicit matrices") {
  const char* text = R"({
    "kind": "custom_channel",
    "parameters": {"x": 0.1, "seed": 3},
    "states": {"psi": [[1, 0], [0, 0]]},
    "kraus": [
      {"label": "a", "op": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]], "derivative": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]},
      {"label": "b", "op": [[[0, 0], [0, 0]], [[0, 0], [1, 0]]], "derivative": [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]}
    ],
    "retained": ["a"],
    "expect": {"theorem1_perp": "pass"}
  })";
  const ScenarioConfig c = parse_config(text);
  REQUIRE(c.kraus.size() == 2);
  CHECK(c.kraus[1].op.matrix(1, 1) == Complex(1, 0));
  CHECK(parse_config(serialize(c)) == c);
}

TEST_CASE("config errors name the offending key and line") {
  SUBCASE("unknown key") {
    try {
      parse_config("{\n  \"kind\": \"dephasing\",\n  \"colour\": 1\n}");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.path() == "colour");
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("key not allowed for the kind") {
    CHECK_THROWS_AS(parse_config(R"({"kind": "dephasing", "parameters": {"eps": 1}})"), ConfigError);
  }
  SUBCASE("malformed matrix row") {
    const std::string text =
        "{\n  \"kind\": \"dephasing\",\n  \"operators\": {\n    \"h0\": [[[1, 0], [0, 0]], [[0, 0]]]\n  }\n}";
    try {
      parse_config(text);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.path() == "operators.h0");
      CHECK(e.line() == 4);
      CHECK(std::string(e.what()).find("operators.h0") != std::string::npos);
      CHECK(e.detail().find("row 1") != std::string::npos);
    }
  }
  SUBCASE("bad verdict expectation") {
    CHECK_THROWS_AS(parse_config(R"({"kind": "dephasing", "expect": {"theorem2": "maybe"}})"),
                    ConfigError);
  }
  SUBCASE("invalid JSON") { CHECK_THROWS_AS(parse_config("{\"kind\": "), ConfigError); }
  SUBCASE("missing jumps for a collision") {
    CHECK_THROWS_AS(parse_config(R"({"kind": "custom_collision"})"), ConfigError);
  }
}

TEST_CASE("grids and scalar parameters") {
  CHECK(parse_grid("lin:0:1:3") == std::vector<double>{0.0, 0.5, 1.0});
  const auto lg = parse_grid("log:1e-3:1e3:41");
  CHECK(lg.size() == 41);
  CHECK(lg.front() == 1e-3);
  CHECK_THROWS_AS(parse_grid("cubic:0:1:3"), ConfigError);
  CHECK_THROWS_AS(parse_grid("lin:0:1:x"), ConfigError);
  CHECK_THROWS_AS(parse_grid("lin:0:1:0"), ConfigError);

  ScenarioConfig c = parse_config(kDephasing);
  CHECK_THROWS_AS(set_parameter(c, "eps", 1.0), ConfigError);
  CHECK_THROWS_AS(set_parameter(c, "scheme", 1.0), ConfigError);
  CHECK_THROWS_AS(set_parameter(c, "bogus", 1.0), ConfigError);
  CHECK_THROWS_AS(set_parameter(c, "N", 0.0), ConfigError);
  set_parameter(c, "N", 64);
  CHECK(c.parameters.N == 64L);
}

TEST_CASE("run_scenario: dephasing") {
  const RunReport r = run_scenario(parse_config(kDephasing));
  CHECK(r.scalars.at("kappa") == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-6));
  CHECK(r.scalars.at("i_q") == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(r.verdicts.at("theorem2").status == "fail");
  CHECK(r.verdicts.at("theorem1_perp").status == "n.a.");
  CHECK(r.table.rows.size() == 1);
  CHECK(r.config_hash.size() == 16);
}

TEST_CASE("run_scenario: transducer") {
  const RunReport r = run_scenario(parse_config(kTransducer));
  CHECK(r.verdicts.at("theorem1_perp").status == "pass");
  CHECK(r.verdicts.at("theorem1_generic").status == "pass");
  CHECK(r.verdicts.at("theorem2").status == "n.a.");
}

TEST_CASE("run_scenario: transducer curve table") {
  ScenarioConfig c = parse_config(kTransducer);
  c.parameters.eps.reset();
  c.parameters.eps_grid = parse_grid("log:1e-3:1e3:5");
  c.parameters.x = 1e-5;
  const RunReport r = run_scenario(c);
  CHECK(r.table.columns ==
        std::vector<std::string>{"eps", "I_sigma_1", "I_sigma_2", "avg_total", "sum_total"});
  CHECK(r.table.rows.size() == 5);
  for (const auto& row : r.table.rows) CHECK(row[3] == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("run_scenario: custom channel and collision") {
  const RunReport ch = run_scenario(parse_config(R"({"kind": "custom_channel", "parameters": {"seed": 4}})"));
  CHECK(ch.scalars.count("i_q"));
  CHECK(ch.scalars.at("sigma_se_qfi") <= ch.scalars.at("i_q") + 1e-8);

  const RunReport co = run_scenario(parse_config(R"({
    "kind": "custom_collision",
    "parameters": {"x": 0.0, "T": 1.0, "N": 256},
    "operators": {"h0": "pauli_z"},
    "states": {"psi": "plus_x"},
    "jumps": [{"op": "pauli_z", "gamma": 1.0}]
  })"));
  CHECK(co.scalars.at("kappa") == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-5));
}

TEST_CASE("report JSON round trip") {
  RunReport r = run_scenario(parse_config(kDephasing));
  r.scalars["missing"] = std::nan("");
  const json j = to_json(r);
  CHECK(j["scalars"]["missing"].is_null());
  CHECK(report_from_json(json::parse(j.dump())) == r);
}

TEST_CASE("cmd_run exit codes") {
  TempDir dir;
  std::ostringstream out, err;
  GlobalOptions opts;

  SUBCASE("success without expectations") {
    CHECK(cmd_run(dir.write("a.json", kDephasing), opts, out, err) == kExitOk);
    CHECK(out.str().find("kappa") != std::string::npos);
  }
  SUBCASE("met expectation") {
    json c = json::parse(kDephasing);
    c["expect"] = {{"theorem2", "fail"}};
    CHECK(cmd_run(dir.write("b.json", c.dump()), opts, out, err) == kExitOk);
  }
  SUBCASE("unmet expectation") {
    json c = json::parse(kDephasing);
    c["expect"] = {{"theorem2", "pass"}};
    CHECK(cmd_run(dir.write("c.json", c.dump()), opts, out, err) == kExitFailed);
  }
  SUBCASE("invalid config") {
    const std::string path = dir.write("d.json", "{\n  \"kind\": \"warp\"\n}");
    CHECK(cmd_run(path, opts, out, err) == kExitInvalid);
    CHECK(err.str().find(path + ":2:") != std::string::npos);
  }
  SUBCASE("missing file") {
    CHECK(cmd_run(dir.file("nope.json"), opts, out, err) == kExitInvalid);
  }
  SUBCASE("invalid physics") {
    json c = json::parse(kTransducer);
    c["operators"]["flip"] = "pauli_z";
    CHECK(cmd_run(dir.write("e.json", c.dump()), opts, out, err) == kExitInvalid);
  }
}

TEST_CASE("CSV output is byte-identical across runs") {
  TempDir dir;
  const std::string cfg = dir.write("fig.json", R"({
    "kind": "transducer",
    "parameters": {"x": 1e-5, "T": 1.0, "eps_grid": "log:1e-3:1e3:41"},
    "operators": {"h0": "pauli_z", "flip": "pauli_x"},
    "states": {"psi": "zero", "env": "plus_x"}
  })");
  std::ostringstream out, err;
  GlobalOptions opts;
  opts.format = OutputFormat::csv;
  opts.output = dir.file("one.csv");
  REQUIRE(cmd_run(cfg, opts, out, err) == kExitOk);
  opts.output = dir.file("two.csv");
  REQUIRE(cmd_run(cfg, opts, out, err) == kExitOk);
  const std::string a = slurp(dir.file("one.csv")), b = slurp(dir.file("two.csv"));
  CHECK(!a.empty());
  CHECK(a == b);
  CHECK(a.find('\r') == std::string::npos);
  CHECK(parse_csv(a).size() == 42);
}

TEST_CASE("JSON output parses back") {
  TempDir dir;
  std::ostringstream out, err;
  GlobalOptions opts;
  opts.format = OutputFormat::json;
  opts.output = dir.file("r.json");
  REQUIRE(cmd_run(dir.write("d.json", kDephasing), opts, out, err) == kExitOk);
  const RunReport r = report_from_json(json::parse(slurp(dir.file("r.json"))));
  CHECK(r.scenario["kind"] == "dephasing");
  CHECK(r.verdicts.at("theorem2").status == "fail");
}

TEST_CASE("sweep over T gives a loss fraction increasing in T") {
  TempDir dir;
  const std::string cfg = dir.write("d.json", kDephasing);
  std::ostringstream out, err;
  GlobalOptions opts;
  opts.jobs = 2;
  REQUIRE(cmd_sweep(cfg, "T", "lin:0.25:2:8", opts, out, err) == kExitOk);
  const auto rows = parse_csv(out.str());
  REQUIRE(rows.size() == 9);
  const std::size_t t_col = column(rows[0], "T"), k_col = column(rows[0], "kappa");
  double prev_t = -1.0, prev_k = -1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double tt = std::stod(rows[i][t_col]), k = std::stod(rows[i][k_col]);
    CHECK(tt > prev_t);
    CHECK(k > prev_k);
    CHECK(k == doctest::Approx(1.0 - std::exp(-tt)).epsilon(1e-5));
    prev_t = tt;
    prev_k = k;
  }

  std::ostringstream serial;
  opts.jobs = 1;
  REQUIRE(cmd_sweep(cfg, "T", "lin:0.25:2:8", opts, serial, err) == kExitOk);
  CHECK(serial.str() == out.str());
}

TEST_CASE("sweep over a zero dephasing rate has no loss") {
  TempDir dir;
  std::ostringstream out, err;
  REQUIRE(cmd_sweep(dir.write("d.json", kDephasing), "gamma", "lin:0:0:1", {}, out, err) == kExitOk);
  const auto rows = parse_csv(out.str());
  REQUIRE(rows.size() == 2);
  CHECK(std::abs(std::stod(rows[1][column(rows[0], "kappa")])) < 1e-12);
}

TEST_CASE("sweep argument errors") {
  TempDir dir;
  const std::string cfg = dir.write("d.json", kDephasing);
  std::ostringstream out, err;
  CHECK(cmd_sweep(cfg, "eps", "lin:0:1:2", {}, out, err) == kExitInvalid);
  CHECK(cmd_sweep(cfg, "gamma", "lin:0:1", {}, out, err) == kExitInvalid);
  CHECK(cmd_sweep(cfg, "gamma", "lin:-1:1:2", {}, out, err) == kExitInvalid);
}

TEST_CASE("verify suites") {
  std::ostringstream out, err;
  CHECK(cmd_verify("gauge", {}, out, err) == kExitOk);
  CHECK(out.str().rfind("PASS gauge.", 0) == 0);
  CHECK(cmd_verify("nonexistent", {}, out, err) == kExitInvalid);
  CHECK(verify_suites().size() == 5);
}
