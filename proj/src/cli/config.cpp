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

#include "qfi/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "qfi/scenarios.hpp"

namespace qfi::cli {

using nlohmann::json;

namespace {

std::string format_error(const std::string& path, const std::string& message, int line) {
  std::string out;
  if (line > 0) out += "line " + std::to_string(line) + ": ";
  if (!path.empty()) out += path + ": ";
  return out + message;
}

/// Line of the innermost key of `path` in the source text, 0 if not found.
int locate_line(const std::string& text, const std::string& path) {
  std::size_t pos = 0;
  bool found = false;
  std::string segment;
  std::stringstream ss(path);
  while (std::getline(ss, segment, '.')) {
    const auto bracket = segment.find('[');
    if (bracket != std::string::npos) segment.resize(bracket);
    if (segment.empty()) continue;
    const std::string quoted = "\"" + segment + "\"";
    for (std::size_t at = text.find(quoted, pos); at != std::string::npos;
         at = text.find(quoted, at + 1)) {
      std::size_t after = at + quoted.size();
      while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
      if (after < text.size() && text[after] == ':') {
        pos = at;
        found = true;
        break;
      }
    }
  }
  if (!found) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
}

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    throw ConfigError(path, message, locate_line(text_, path));
  }

  void require_keys(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
      if (!allowed.count(key)) fail(join(path, key), "unknown key");
    }
  }

  double number(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path, "expected a finite number");
    return d;
  }

  std::string string(const json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  Complex complex(const json& v, const std::string& path) const {
    if (!v.is_array() || v.size() != 2) fail(path, "expected a [re, im] pair");
    return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
  }

  MatrixValue matrix(const json& v, const std::string& path) const {
    MatrixValue m;
    if (v.is_string()) {
      m.preset = v.get<std::string>();
      static const std::set<std::string> presets = {"pauli_x", "pauli_y", "pauli_z", "identity"};
      if (!presets.count(m.preset)) fail(path, "unknown operator preset '" + m.preset + "'");
      return m;
    }
    if (!v.is_array() || v.empty()) fail(path, "expected a preset name or a nonempty matrix");
    const auto n = static_cast<Eigen::Index>(v.size());
    m.matrix.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const json& row = v[i];
      const std::string row_path = path + "[" + std::to_string(i) + "]";
      if (!row.is_array()) fail(row_path, "expected a row of [re, im] pairs");
      if (static_cast<Eigen::Index>(row.size()) != n) {
        fail(path, "row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                       " entries, expected " + std::to_string(n) + " (matrix must be square)");
      }
      for (Eigen::Index j = 0; j < n; ++j) {
        m.matrix(i, j) = complex(row[j], row_path + "[" + std::to_string(j) + "]");
      }
    }
    return m;
  }

  KetValue ket(const json& v, const std::string& path) const {
    KetValue k;
    if (v.is_string()) {
      k.preset = v.get<std::string>();
      static const std::set<std::string> presets = {"zero", "one", "plus_x", "minus_x"};
      if (!presets.count(k.preset)) fail(path, "unknown state preset '" + k.preset + "'");
      return k;
    }
    if (!v.is_array() || v.empty()) fail(path, "expected a preset name or a nonempty vector");
    k.vector.resize(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      k.vector(static_cast<Eigen::Index>(i)) = complex(v[i], path + "[" + std::to_string(i) + "]");
    }
    return k;
  }

  static std::string join(const std::string& a, const std::string& b) {
    return a.empty() ? b : a + "." + b;
  }

 private:
  const std::string& text_;
};

struct KindRules {
  std::set<std::string> parameters;
  std::set<std::string> operators;
  std::set<std::string> states;
  std::set<std::string> top;
  std::set<std::string> verdicts;
};

const KindRules& rules(Kind kind) {
  static const KindRules transducer{{"x", "T", "eps", "eps_grid", "tol", "fd_step"},
                                    {"h0", "flip"},
                                    {"psi", "env"},
                                    {"retained"},
                                    {"theorem1_perp", "theorem1_generic"}};
  static const KindRules dephasing{{"x", "T", "N", "gamma", "tol", "scheme"},
                                   {"h0", "jump", "h1"},
                                   {"psi"},
                                   {},
                                   {"theorem2"}};
  static const KindRules custom_channel{{"x", "tol", "seed"},
                                        {},
                                        {"psi"},
                                        {"kraus", "retained"},
                                        {"theorem1_perp", "theorem1_generic"}};
  static const KindRules custom_collision{{"x", "T", "N", "tol", "scheme"},
                                          {"h0", "h1"},
                                          {"psi"},
                                          {"jumps"},
                                          {"theorem2"}};
  switch (kind) {
    case Kind::transducer: return transducer;
    case Kind::dephasing: return dephasing;
    case Kind::custom_channel: return custom_channel;
    case Kind::custom_collision: return custom_collision;
  }
  return transducer;
}

Kind parse_kind(const std::string& s, const Reader& r) {
  if (s == "transducer") return Kind::transducer;
  if (s == "dephasing") return Kind::dephasing;
  if (s == "custom_channel") return Kind::custom_channel;
  if (s == "custom_collision") return Kind::custom_collision;
  r.fail("kind", "unknown kind '" + s + "'");
}

Parameters parse_parameters(const json& obj, const Reader& r, const KindRules& kr) {
  r.require_keys(obj, "parameters", kr.parameters);
  Parameters p;
  for (const auto& [key, v] : obj.items()) {
    const std::string path = "parameters." + key;
    if (key == "N") {
      if (!v.is_number_integer() || v.get<long>() < 1) r.fail(path, "expected an integer >= 1");
      p.N = v.get<long>();
    } else if (key == "seed") {
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        r.fail(path, "expected a nonnegative integer");
      }
      p.seed = v.get<std::uint64_t>();
    } else if (key == "scheme") {
      const std::string s = r.string(v, path);
      if (s == "expm_step") {
        p.scheme = Scheme::expm_step;
      } else if (s == "euler_paper") {
        p.scheme = Scheme::euler_paper;
      } else {
        r.fail(path, "expected 'expm_step' or 'euler_paper'");
      }
    } else if (key == "eps_grid") {
      if (v.is_string()) {
        try {
          p.eps_grid = parse_grid(v.get<std::string>());
        } catch (const Error& e) {
          r.fail(path, e.what());
        }
      } else if (v.is_array() && !v.empty()) {
        std::vector<double> grid;
        for (std::size_t i = 0; i < v.size(); ++i) {
          grid.push_back(r.number(v[i], path + "[" + std::to_string(i) + "]"));
        }
        p.eps_grid = std::move(grid);
      } else {
        r.fail(path, "expected a grid string or a nonempty array of numbers");
      }
    } else {
      const double d = r.number(v, path);
      if (key == "x") p.x = d;
      if (key == "T") {
        if (d < 0.0) r.fail(path, "expected T >= 0");
        p.T = d;
      }
      if (key == "eps") p.eps = d;
      if (key == "gamma") {
        if (d < 0.0) r.fail(path, "expected gamma >= 0");
        p.gamma = d;
      }
      if (key == "tol") {
        if (d <= 0.0) r.fail(path, "expected tol > 0");
        p.tol = d;
      }
      if (key == "fd_step") {
        if (d <= 0.0) r.fail(path, "expected fd_step > 0");
        p.fd_step = d;
      }
    }
  }
  if (p.eps && p.eps_grid) r.fail("parameters.eps_grid", "give either eps or eps_grid, not both");
  return p;
}

json matrix_json(const MatrixValue& m) {
  if (!m.preset.empty()) return m.preset;
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.matrix.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.matrix.cols(); ++j) {
      row.push_back({m.matrix(i, j).real(), m.matrix(i, j).imag()});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json ket_json(const KetValue& k) {
  if (!k.preset.empty()) return k.preset;
  json out = json::array();
  for (Eigen::Index i = 0; i < k.vector.size(); ++i) {
    out.push_back({k.vector(i).real(), k.vector(i).imag()});
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::string path, const std::string& message, int line)
    : Error(format_error(path, message, line)), path_(std::move(path)), detail_(message),
      line_(line) {}

const char* to_string(Kind kind) {
  switch (kind) {
    case Kind::transducer: return "transducer";
    case Kind::dephasing: return "dephasing";
    case Kind::custom_channel: return "custom_channel";
    case Kind::custom_collision: return "custom_collision";
  }
  return "";
}

const char* to_string(OutputFormat format) {
  return format == OutputFormat::csv ? "csv" : "json";
}

const char* to_string(Scheme scheme) {
  return scheme == Scheme::expm_step ? "expm_step" : "euler_paper";
}

Operator MatrixValue::resolve(Eigen::Index dim) const {
  if (preset.empty()) return matrix;
  if (preset == "pauli_x") return ops::pauli_x();
  if (preset == "pauli_y") return ops::pauli_y();
  if (preset == "pauli_z") return ops::pauli_z();
  return ops::identity(dim);
}

bool MatrixValue::operator==(const MatrixValue& o) const {
  if (preset != o.preset) return false;
  return matrix.rows() == o.matrix.rows() && matrix.cols() == o.matrix.cols() &&
         (matrix.size() == 0 || matrix == o.matrix);
}

Ket KetValue::resolve() const {
  if (preset.empty()) return vector;
  if (preset == "zero") return ops::basis(2, 0);
  if (preset == "one") return ops::basis(2, 1);
  if (preset == "plus_x") return ops::plus_x();
  return ops::minus_x();
}

bool KetValue::operator==(const KetValue& o) const {
  if (preset != o.preset) return false;
  return vector.size() == o.vector.size() && (vector.size() == 0 || vector == o.vector);
}

const std::vector<std::string>& scalar_parameters() {
  static const std::vector<std::string> names = {"x", "T", "N", "eps", "gamma", "tol", "fd_step", "seed"};
  return names;
}

void set_parameter(ScenarioConfig& config, const std::string& name, double value) {
  const std::string path = "parameters." + name;
  const auto& allowed = rules(config.kind).parameters;
  if (name == "eps_grid" || name == "scheme") throw ConfigError(path, "parameter is not scalar");
  if (std::find(scalar_parameters().begin(), scalar_parameters().end(), name) ==
      scalar_parameters().end()) {
    throw ConfigError(path, "unknown parameter");
  }
  if (!allowed.count(name)) {
    throw ConfigError(path, std::string("not a parameter of kind ") + to_string(config.kind));
  }
  if (!std::isfinite(value)) throw ConfigError(path, "value must be finite");
  Parameters& p = config.parameters;
  if (name == "x") p.x = value;
  if (name == "T") {
    if (value < 0.0) throw ConfigError(path, "expected T >= 0");
    p.T = value;
  }
  if (name == "N") {
    const long n = std::lround(value);
    if (n < 1) throw ConfigError(path, "expected an integer >= 1");
    p.N = n;
  }
  if (name == "eps") {
    p.eps = value;
    p.eps_grid.reset();
  }
  if (name == "gamma") {
    if (value < 0.0) throw ConfigError(path, "expected gamma >= 0");
    p.gamma = value;
  }
  if (name == "tol") {
    if (value <= 0.0) throw ConfigError(path, "expected tol > 0");
    p.tol = value;
  }
  if (name == "fd_step") {
    if (value <= 0.0) throw ConfigError(path, "expected fd_step > 0");
    p.fd_step = value;
  }
  if (name == "seed") {
    if (value < 0.0) throw ConfigError(path, "expected a nonnegative integer");
    p.seed = static_cast<std::uint64_t>(std::llround(value));
  }
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 4 || (parts[0] != "lin" && parts[0] != "log")) {
    throw ConfigError("", "grid '" + spec + "' is not of the form lin:a:b:n or log:a:b:n");
  }
  double a = 0.0, b = 0.0;
  long n = 0;
  try {
    std::size_t used = 0;
    a = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("a");
    b = std::stod(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("b");
    n = std::stol(parts[3], &used);
    if (used != parts[3].size()) throw std::invalid_argument("n");
  } catch (const std::exception&) {
    throw ConfigError("", "grid '" + spec + "' has malformed bounds or count");
  }
  if (n < 1) throw ConfigError("", "grid '" + spec + "' needs at least one point");
  try {
    return parts[0] == "lin" ? lin_grid(a, b, static_cast<int>(n))
                             : log_grid(a, b, static_cast<int>(n));
  } catch (const Error& e) {
    throw ConfigError("", "grid '" + spec + "': " + e.what());
  }
}

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ConfigError("", e.what(), line);
  }
  const Reader r(text);
  if (!root.is_object()) r.fail("", "top level must be an object");
  if (!root.contains("kind")) r.fail("kind", "missing required key");

  ScenarioConfig c;
  c.kind = parse_kind(r.string(root["kind"], "kind"), r);
  const KindRules& kr = rules(c.kind);
  std::set<std::string> top = {"kind", "parameters", "operators", "states", "expect", "output"};
  top.insert(kr.top.begin(), kr.top.end());
  r.require_keys(root, "", top);

  if (root.contains("parameters")) c.parameters = parse_parameters(root["parameters"], r, kr);
  if (root.contains("operators")) {
    r.require_keys(root["operators"], "operators", kr.operators);
    for (const auto& [key, v] : root["operators"].items()) {
      c.operators[key] = r.matrix(v, "operators." + key);
    }
  }
  if (root.contains("states")) {
    r.require_keys(root["states"], "states", kr.states);
    for (const auto& [key, v] : root["states"].items()) c.states[key] = r.ket(v, "states." + key);
  }
  if (root.contains("kraus")) {
    const json& list = root["kraus"];
    if (!list.is_array() || list.empty()) r.fail("kraus", "expected a nonempty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "kraus[" + std::to_string(i) + "]";
      r.require_keys(list[i], path, {"label", "op", "derivative"});
      for (const char* req : {"label", "op", "derivative"}) {
        if (!list[i].contains(req)) r.fail(path + "." + req, "missing required key");
      }
      KrausEntry k;
      k.label = r.string(list[i]["label"], path + ".label");
      k.op = r.matrix(list[i]["op"], path + ".op");
      k.derivative = r.matrix(list[i]["derivative"], path + ".derivative");
      c.kraus.push_back(std::move(k));
    }
  }
  if (root.contains("retained")) {
    const json& list = root["retained"];
    if (!list.is_array()) r.fail("retained", "expected an array of labels");
    for (std::size_t i = 0; i < list.size(); ++i) {
      c.retained.push_back(r.string(list[i], "retained[" + std::to_string(i) + "]"));
    }
  }
  if (root.contains("jumps")) {
    const json& list = root["jumps"];
    if (!list.is_array()) r.fail("jumps", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "jumps[" + std::to_string(i) + "]";
      r.require_keys(list[i], path, {"op", "gamma"});
      if (!list[i].contains("op")) r.fail(path + ".op", "missing required key");
      if (!list[i].contains("gamma")) r.fail(path + ".gamma", "missing required key");
      JumpEntry j;
      j.op = r.matrix(list[i]["op"], path + ".op");
      j.gamma = r.number(list[i]["gamma"], path + ".gamma");
      if (j.gamma < 0.0) r.fail(path + ".gamma", "expected gamma >= 0");
      c.jumps.push_back(std::move(j));
    }
  }
  if (root.contains("expect")) {
    r.require_keys(root["expect"], "expect", kr.verdicts);
    for (const auto& [key, v] : root["expect"].items()) {
      const std::string s = r.string(v, "expect." + key);
      if (s != "pass" && s != "fail") r.fail("expect." + key, "expected 'pass' or 'fail'");
      c.expect[key] = s;
    }
  }
  if (root.contains("output")) {
    r.require_keys(root["output"], "output", {"path", "format"});
    Output o;
    if (root["output"].contains("path")) o.path = r.string(root["output"]["path"], "output.path");
    if (root["output"].contains("format")) {
      const std::string f = r.string(root["output"]["format"], "output.format");
      if (f == "csv") {
        o.format = OutputFormat::csv;
      } else if (f == "json") {
        o.format = OutputFormat::json;
      } else {
        r.fail("output.format", "expected 'csv' or 'json'");
      }
    }
    c.output = o;
  }
  if (c.kind == Kind::custom_collision && c.jumps.empty() && !root.contains("jumps")) {
    r.fail("jumps", "missing required key");
  }
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

json to_json(const ScenarioConfig& c) {
  json out;
  out["kind"] = to_string(c.kind);
  json p = json::object();
  const Parameters& q = c.parameters;
  if (q.x) p["x"] = *q.x;
  if (q.T) p["T"] = *q.T;
  if (q.N) p["N"] = *q.N;
  if (q.eps) p["eps"] = *q.eps;
  if (q.eps_grid) p["eps_grid"] = *q.eps_grid;
  if (q.gamma) p["gamma"] = *q.gamma;
  if (q.tol) p["tol"] = *q.tol;
  if (q.fd_step) p["fd_step"] = *q.fd_step;
  if (q.seed) p["seed"] = *q.seed;
  if (q.scheme) p["scheme"] = to_string(*q.scheme);
  out["parameters"] = std::move(p);
  if (!c.operators.empty()) {
    for (const auto& [k, m] : c.operators) out["operators"][k] = matrix_json(m);
  }
  if (!c.states.empty()) {
    for (const auto& [k, s] : c.states) out["states"][k] = ket_json(s);
  }
  if (!c.kraus.empty()) {
    json list = json::array();
    for (const auto& k : c.kraus) {
      list.push_back({{"label", k.label}, {"op", matrix_json(k.op)},
                      {"derivative", matrix_json(k.derivative)}});
    }
    out["kraus"] = std::move(list);
  }
  if (!c.retained.empty()) out["retained"] = c.retained;
  if (c.kind == Kind::custom_collision || !c.jumps.empty()) {
    json list = json::array();
    for (const auto& j : c.jumps) list.push_back({{"op", matrix_json(j.op)}, {"gamma", j.gamma}});
    out["jumps"] = std::move(list);
  }
  if (!c.expect.empty()) out["expect"] = c.expect;
  if (c.output) {
    out["output"] = {{"path", c.output->path}, {"format", to_string(c.output->format)}};
  }
  return out;
}

std::string serialize(const ScenarioConfig& config) { return to_json(config).dump(2) + "\n"; }

std::string config_hash(const ScenarioConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qfi::cli
