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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qfi/collision.hpp"
#include "qfi/core.hpp"

namespace qfi::cli {

/// Parse or validation failure. `path` is the dotted key path, `line` is 1-based
/// (0 when unknown).
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message, int line = 0);

  const std::string& path() const { return path_; }
  int line() const { return line_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string path_;
  std::string detail_;
  int line_;
};

enum class Kind { transducer, dephasing, custom_channel, custom_collision };
enum class OutputFormat { csv, json };

const char* to_string(Kind kind);
const char* to_string(OutputFormat format);
const char* to_string(Scheme scheme);

/// Either a named preset (pauli_x, pauli_y, pauli_z, identity) or a dense matrix.
struct MatrixValue {
  std::string preset;
  Operator matrix;

  /// `identity` takes its size from `dim`.
  Operator resolve(Eigen::Index dim) const;
  bool operator==(const MatrixValue& o) const;
};

/// Either a named preset (zero, one, plus_x, minus_x) or an explicit vector.
struct KetValue {
  std::string preset;
  Ket vector;

  Ket resolve() const;
  bool operator==(const KetValue& o) const;
};

struct KrausEntry {
  std::string label;
  MatrixValue op;
  MatrixValue derivative;
  bool operator==(const KrausEntry& o) const = default;
};

struct JumpEntry {
  MatrixValue op;
  double gamma = 0.0;
  bool operator==(const JumpEntry& o) const = default;
};

struct Parameters {
  std::optional<double> x;
  std::optional<double> T;
  std::optional<long> N;
  std::optional<double> eps;
  std::optional<std::vector<double>> eps_grid;
  std::optional<double> gamma;
  std::optional<double> tol;
  std::optional<double> fd_step;
  std::optional<std::uint64_t> seed;
  std::optional<Scheme> scheme;
  bool operator==(const Parameters& o) const = default;
};

struct Output {
  std::string path;
  OutputFormat format = OutputFormat::csv;
  bool operator==(const Output& o) const = default;
};

struct ScenarioConfig {
  Kind kind = Kind::transducer;
  Parameters parameters;
  std::map<std::string, MatrixValue> operators;
  std::map<std::string, KetValue> states;
  std::vector<KrausEntry> kraus;
  std::vector<std::string> retained;
  std::vector<JumpEntry> jumps;
  /// verdict name -> "pass" | "fail"
  std::map<std::string, std::string> expect;
  std::optional<Output> output;
  bool operator==(const ScenarioConfig& o) const = default;
};

/// Names accepted by `sweep --param`.
const std::vector<std::string>& scalar_parameters();

/// Sets a scalar parameter; throws ConfigError for a non-scalar or unknown name.
void set_parameter(ScenarioConfig& config, const std::string& name, double value);

/// `lin:a:b:n` or `log:a:b:n`.
std::vector<double> parse_grid(const std::string& spec);

/// Strict parse. Errors carry the key path and the line of the offending key.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Canonical JSON form: presets stay named, matrices become [re, im] pairs,
/// grids are expanded.
nlohmann::json to_json(const ScenarioConfig& config);
std::string serialize(const ScenarioConfig& config);

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

}  // namespace qfi::cli
