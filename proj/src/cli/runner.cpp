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

#include "qfi/cli/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "qfi/collision.hpp"
#include "qfi/encoding.hpp"
#include "qfi/fisher.hpp"
#include "qfi/scenarios.hpp"

#ifndef QFI_VERSION
#define QFI_VERSION "0.0.0"
#endif

namespace qfi::cli {

using nlohmann::json;

namespace {

constexpr double kDefaultTol = 1e-9;

double tol_of(const ScenarioConfig& c) { return c.parameters.tol.value_or(kDefaultTol); }

Operator operator_or(const ScenarioConfig& c, const std::string& key, const char* preset,
                     Eigen::Index dim) {
  const auto it = c.operators.find(key);
  if (it != c.operators.end()) return it->second.resolve(dim);
  return MatrixValue{preset, {}}.resolve(dim);
}

Ket state_or(const ScenarioConfig& c, const std::string& key, const Ket& fallback) {
  const auto it = c.states.find(key);
  const Ket k = it != c.states.end() ? it->second.resolve() : fallback;
  if (!is_normalized(k, kExactTol)) throw ConfigError("states." + key, "state is not normalized");
  return k;
}

void require_dim(const Operator& a, Eigen::Index dim, const std::string& path) {
  if (a.rows() != dim || a.cols() != dim) {
    throw ConfigError(path, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) +
                                " matrix, got " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()));
  }
}

void require_hermitian(const Operator& a, const std::string& path) {
  if (!is_hermitian(a)) throw ConfigError(path, "operator must be Hermitian");
}

Verdict verdict(bool pass, std::map<std::string, double> residuals) {
  return {pass ? "pass" : "fail", std::move(residuals)};
}

void put_efg(RunReport& r, const EfgReport& e) {
  r.scalars["e_total"] = e.e_total;
  r.scalars["f_total_re"] = e.f_total.real();
  r.scalars["f_total_im"] = e.f_total.imag();
  r.scalars["g_total"] = e.g_total;
  r.scalars["e_retained"] = e.e_retained;
  r.scalars["f_retained_re"] = e.f_retained.real();
  r.scalars["f_retained_im"] = e.f_retained.imag();
  r.scalars["g_retained"] = e.g_retained;
  r.scalars["e_discarded"] = e.e_discarded;
  r.scalars["f_discarded_re"] = e.f_discarded.real();
  r.scalars["f_discarded_im"] = e.f_discarded.imag();
  r.scalars["g_discarded"] = e.g_discarded;
  r.scalars["i_q"] = e.i_q;
  r.scalars["avg_ps_qfi"] = e.avg_ps_qfi;
  r.scalars["kappa"] = e.kappa;
}

void put_theorem1(RunReport& r, const MeasurementChannel& channel, const KrausDerivatives& dm,
                  const Ket& psi, double tol) {
  const PerpVerdict perp = check_lossless_perp(channel, dm, psi, tol);
  std::map<std::string, double> res{{"worst", perp.worst},
                                    {"positivity_violations",
                                     static_cast<double>(perp.positivity_violations.size())},
                                    {"dtheta", perp.gauge.dtheta}};
  for (const auto& o : perp.retained) res["retained." + o.label] = o.value;
  for (const auto& o : perp.discarded) res["discarded." + o.label] = o.value;
  r.verdicts["theorem1_perp"] = verdict(perp.lossless, std::move(res));

  const GenericVerdict gen = check_lossless_generic(channel, dm, psi, tol);
  std::map<std::string, double> gres{{"worst", gen.worst}, {"discarded", gen.discarded}};
  for (const auto& o : gen.retained) gres["retained." + o.label] = o.value;
  for (const auto& o : gen.necessary) gres["necessary." + o.label] = o.value;
  r.verdicts["theorem1_generic"] = verdict(gen.lossless, std::move(gres));
}

void put_theorem2(RunReport& r, const Theorem2Verdict& v) {
  r.verdicts["theorem2"] = verdict(v.lossless, {{"energy", v.energy_residual},
                                                {"jump", v.jump_residual},
                                                {"jump_worst_time", v.jump_worst_time},
                                                {"dtheta", v.dtheta}});
}

void fill_table(RunReport& r, std::vector<std::string> columns) {
  std::vector<double> row;
  for (const auto& c : columns) {
    const auto it = r.scalars.find(c);
    row.push_back(it == r.scalars.end() ? std::nan("") : it->second);
  }
  r.table.columns = std::move(columns);
  r.table.rows = {std::move(row)};
}

const std::vector<std::string> kFig1bColumns = {"eps", "I_sigma_1", "I_sigma_2", "avg_total",
                                                "sum_total"};

void run_transducer(const ScenarioConfig& c, RunReport& r) {
  const Ket env = state_or(c, "env", ops::plus_x());
  const Ket psi = state_or(c, "psi", ops::basis(2, 0));
  TransducerSpec spec;
  spec.env_initial = env;
  spec.sys_initial = psi;
  spec.h0_env = operator_or(c, "h0", "pauli_z", env.size());
  spec.flip = operator_or(c, "flip", "pauli_x", psi.size());
  require_dim(spec.h0_env, env.size(), "operators.h0");
  require_dim(spec.flip, psi.size(), "operators.flip");
  require_hermitian(spec.h0_env, "operators.h0");
  spec.x = c.parameters.x.value_or(1e-5);
  spec.total_time = c.parameters.T.value_or(1.0);
  const double tol = tol_of(c);
  const std::set<std::string> retained(c.retained.begin(), c.retained.end());

  if (c.parameters.eps_grid) {
    const auto rows = fig1b_sweep(spec, *c.parameters.eps_grid);
    const double expected = build_transducer(spec).expected_iq;
    double dev = 0.0, min_sum = INFINITY, worst = 0.0;
    r.table.columns = kFig1bColumns;
    for (const auto& row : rows) {
      r.table.rows.push_back({row.eps, row.i_sigma_1, row.i_sigma_2, row.avg_total, row.sum_total});
      dev = std::max(dev, std::abs(row.avg_total - expected));
      min_sum = std::min(min_sum, row.sum_total);
      worst = std::max(worst, row.theorem1_residual);
    }
    r.scalars["expected_iq"] = expected;
    r.scalars["max_avg_deviation"] = dev;
    r.scalars["min_sum_total"] = min_sum;
    r.scalars["max_theorem1_residual"] = worst;
    r.verdicts["theorem1_perp"] = verdict(worst <= tol, {{"worst", worst}});
    return;
  }

  spec.eps = c.parameters.eps.value_or(1.0);
  const Transducer tr = build_transducer(spec, retained);
  const MeasurementChannel channel = tr.family(spec.x);
  DerivativeConfig dcfg;
  if (c.parameters.fd_step) {
    dcfg.mode = DerivativeMode::central_fd;
    dcfg.step = *c.parameters.fd_step;
  }
  const FamilyDerivative fd = family_derivative(tr.family, spec.x, dcfg);
  put_efg(r, analyze(channel, fd.derivatives, psi));
  const AmplificationReport amp = amplification_report(channel, fd.derivatives, psi);
  r.scalars["eps"] = spec.eps;
  r.scalars["expected_iq"] = tr.expected_iq;
  r.scalars["p_1"] = amp.entries.at(0).probability;
  r.scalars["p_2"] = amp.entries.at(1).probability;
  r.scalars["I_sigma_1"] = amp.entries[0].conditional_qfi;
  r.scalars["I_sigma_2"] = amp.entries[1].conditional_qfi;
  r.scalars["avg_total"] = amp.avg_qfi;
  r.scalars["sum_total"] = amp.sum_qfi;
  r.scalars["derivative_truncation_error"] = fd.truncation_error;
  r.scalars["weak_signal_residual"] = tr.weak_signal_residual;
  put_theorem1(r, channel, fd.derivatives, psi, tol);
  fill_table(r, kFig1bColumns);
}

void run_dephasing(const ScenarioConfig& c, RunReport& r) {
  const Ket psi = state_or(c, "psi", ops::plus_x());
  const Eigen::Index d = psi.size();
  const Operator h0 = operator_or(c, "h0", "pauli_z", d);
  const Operator jump = operator_or(c, "jump", "pauli_z", d);
  require_dim(h0, d, "operators.h0");
  require_dim(jump, d, "operators.jump");
  require_hermitian(h0, "operators.h0");
  std::function<Operator(double)> h1;
  if (c.operators.count("h1")) {
    const Operator m = c.operators.at("h1").resolve(d);
    require_dim(m, d, "operators.h1");
    require_hermitian(m, "operators.h1");
    h1 = [m](double) { return m; };
  }
  const Parameters& p = c.parameters;
  const double gamma = p.gamma.value_or(1.0);
  const double t = p.T.value_or(1.0);
  const double x = p.x.value_or(0.0);
  const TimeGrid grid(t, p.N.value_or(16384), p.scheme.value_or(Scheme::expm_step));
  const CollisionSpec spec = build_dephasing(h0, h1, jump, gamma, t, psi, x);

  const NhLoss loss = nh_loss(spec, grid, x, psi);
  r.scalars["gamma"] = gamma;
  r.scalars["T"] = t;
  r.scalars["N"] = static_cast<double>(grid.steps());
  r.scalars["x"] = x;
  r.scalars["kappa"] = loss.kappa;
  r.scalars["kappa_first_jump"] = loss.kappa_first_jump;
  r.scalars["p_check"] = loss.p_check;
  r.scalars["i_sigma"] = loss.i_sigma;
  r.scalars["i_q"] = loss.i_q;
  r.scalars["i_q_first_jump"] = loss.i_q_first_jump;
  r.scalars["kappa_closed_form"] =
      dephasing_closed_form(h0, gamma * (jump.adjoint() * jump), t, psi);
  put_theorem2(r, check_theorem2(spec, grid, x, psi, tol_of(c)));
  fill_table(r, {"T", "gamma", "N", "x", "kappa", "kappa_closed_form", "kappa_first_jump",
                 "p_check", "i_sigma", "i_q"});
}

void run_custom_channel(const ScenarioConfig& c, RunReport& r) {
  const double x = c.parameters.x.value_or(0.0);
  std::optional<MeasurementChannel> channel;
  KrausDerivatives dm;
  if (c.kraus.empty()) {
    const ChannelFamily family = random_family(2, 2, c.parameters.seed.value_or(0));
    channel = family(x);
    dm = family.analytic_derivative(x);
  } else {
    const MatrixValue& first = c.kraus.front().op;
    const Eigen::Index d = first.preset.empty() ? first.matrix.rows() : 2;
    std::vector<KrausOperator> kraus;
    for (std::size_t i = 0; i < c.kraus.size(); ++i) {
      const std::string path = "kraus[" + std::to_string(i) + "]";
      kraus.push_back({c.kraus[i].label, c.kraus[i].op.resolve(d)});
      dm.push_back(c.kraus[i].derivative.resolve(d));
      require_dim(kraus.back().op, d, path + ".op");
      require_dim(dm.back(), d, path + ".derivative");
    }
    try {
      channel.emplace(std::move(kraus));
    } catch (const Error& e) {
      throw ConfigError("kraus", e.what());
    }
  }
  if (!c.retained.empty()) {
    try {
      channel = channel->with_retained({c.retained.begin(), c.retained.end()});
    } catch (const Error& e) {
      throw ConfigError("retained", e.what());
    }
  }
  const Ket psi = state_or(c, "psi", ops::basis(channel->dim(), 0));
  if (psi.size() != channel->dim()) throw ConfigError("states.psi", "dimension does not match Kraus operators");
  if (!channel->exact()) {
    throw ConfigError("kraus", "Kraus operators are not complete (residual " +
                                   format_number(channel->completeness_residual()) + ")");
  }
  const EfgReport e = analyze(*channel, dm, psi);
  put_efg(r, e);
  r.scalars["x"] = x;
  r.scalars["sigma_se_qfi"] = sigma_se_qfi(*channel, dm, psi).total;
  r.scalars["mixed_qfi"] = mixed_qfi(*channel, dm, psi);
  r.scalars["completeness_residual"] = channel->completeness_residual();
  if (e.i_q > 1e-14) {
    const KappaResult k = loss_kappa(e, tol_of(c));
    r.scalars["kappa_formula"] = k.value;
    r.scalars["kappa_formula_conditional"] = k.conditional ? 1.0 : 0.0;
  }
  put_theorem1(r, *channel, dm, psi, tol_of(c));
  fill_table(r, {"i_q", "avg_ps_qfi", "kappa", "sigma_se_qfi", "mixed_qfi", "e_total",
                 "f_total_re", "f_total_im", "g_total", "e_retained", "f_retained_re",
                 "f_retained_im", "g_retained"});
}

void run_custom_collision(const ScenarioConfig& c, RunReport& r) {
  if (!c.operators.count("h0")) throw ConfigError("operators.h0", "missing required key");
  const MatrixValue& h0v = c.operators.at("h0");
  const Eigen::Index d = h0v.preset.empty() ? h0v.matrix.rows() : 2;
  const Operator h0 = h0v.resolve(d);
  require_hermitian(h0, "operators.h0");
  CollisionSpec spec;
  spec.dim = d;
  spec.h0 = [h0](double, double x) { return Operator(x * h0); };
  spec.dh0 = [h0](double, double) { return h0; };
  if (c.operators.count("h1")) {
    const Operator h1 = c.operators.at("h1").resolve(d);
    require_dim(h1, d, "operators.h1");
    require_hermitian(h1, "operators.h1");
    spec.h1 = [h1](double) { return h1; };
  }
  for (std::size_t i = 0; i < c.jumps.size(); ++i) {
    const Operator l = c.jumps[i].op.resolve(d);
    require_dim(l, d, "jumps[" + std::to_string(i) + "].op");
    const double g = c.jumps[i].gamma;
    spec.jumps.push_back({l, [g](double) { return g; }});
  }
  const Ket psi = state_or(c, "psi", ops::basis(d, 0));
  if (psi.size() != d) throw ConfigError("states.psi", "dimension does not match operators.h0");
  const Parameters& p = c.parameters;
  const double x = p.x.value_or(0.0);
  const TimeGrid grid(p.T.value_or(1.0), p.N.value_or(4096), p.scheme.value_or(Scheme::expm_step));

  const NhLoss loss = nh_loss(spec, grid, x, psi);
  r.scalars["T"] = grid.total_time();
  r.scalars["N"] = static_cast<double>(grid.steps());
  r.scalars["x"] = x;
  r.scalars["kappa"] = loss.kappa;
  r.scalars["kappa_first_jump"] = loss.kappa_first_jump;
  r.scalars["p_check"] = loss.p_check;
  r.scalars["i_sigma"] = loss.i_sigma;
  r.scalars["i_q"] = loss.i_q;
  r.scalars["i_q_first_jump"] = loss.i_q_first_jump;
  r.scalars["integral_completeness_residual"] = check_integral_completeness(spec, grid, x);
  put_theorem2(r, check_theorem2(spec, grid, x, psi, tol_of(c)));
  fill_table(r, {"T", "N", "x", "kappa", "kappa_first_jump", "p_check", "i_sigma", "i_q",
                 "i_q_first_jump", "integral_completeness_residual"});
}

std::string describe(const std::string& config_path, const ConfigError& e) {
  std::string out = config_path;
  if (e.line() > 0) out += ":" + std::to_string(e.line());
  out += ": ";
  if (!e.path().empty()) out += e.path() + ": ";
  return out + e.detail();
}

bool write_output(const std::string& path, const std::string& content, std::ostream& err) {
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    err << "error: cannot write '" << path << "'\n";
    return false;
  }
  f << content;
  return static_cast<bool>(f);
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunReport r;
  r.scenario = to_json(config);
  r.version = QFI_VERSION;
  r.config_hash = config_hash(config);
  switch (config.kind) {
    case Kind::transducer: run_transducer(config, r); break;
    case Kind::dephasing: run_dephasing(config, r); break;
    case Kind::custom_channel: run_custom_channel(config, r); break;
    case Kind::custom_collision: run_custom_collision(config, r); break;
  }
  for (const char* name : {"theorem1_perp", "theorem1_generic", "theorem2"}) {
    r.verdicts.try_emplace(name);  // n.a. when the kind does not define it
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

int cmd_run(const std::string& config_path, const GlobalOptions& opts, std::ostream& out,
            std::ostream& err) {
  ScenarioConfig config;
  RunReport report;
  try {
    config = load_config(config_path);
    if (opts.tol) config.parameters.tol = *opts.tol;
    report = run_scenario(config);
  } catch (const ConfigError& e) {
    err << "error: " << describe(config_path, e) << '\n';
    return kExitInvalid;
  } catch (const Error& e) {
    err << "error: " << config_path << ": " << e.what() << '\n';
    return kExitInvalid;
  }

  const std::optional<std::string> path =
      opts.output ? opts.output
                  : (config.output && !config.output->path.empty() ? std::optional(config.output->path)
                                                                   : std::nullopt);
  const OutputFormat format =
      opts.format.value_or(config.output ? config.output->format : OutputFormat::csv);
  std::ostringstream body;
  if (format == OutputFormat::csv) {
    write_csv(report.table, body);
  } else {
    body << to_json(report).dump(2) << '\n';
  }
  std::ostream& summary = path ? out : err;
  if (path) {
    if (!write_output(*path, body.str(), err)) return kExitInvalid;
  } else {
    out << body.str();
  }

  int code = kExitOk;
  for (const auto& [name, v] : report.verdicts) {
    if (v.status == "n.a.") continue;
    const auto worst = v.residuals.find("worst");
    summary << name << ": " << v.status;
    if (worst != v.residuals.end()) summary << " (worst residual " << format_number(worst->second) << ")";
    summary << '\n';
  }
  for (const auto& [name, expected] : config.expect) {
    const std::string got = report.verdicts.count(name) ? report.verdicts.at(name).status : "n.a.";
    if (got != expected) {
      err << "expectation failed: " << name << " expected " << expected << ", got " << got << '\n';
      code = kExitFailed;
    }
  }
  return code;
}

int cmd_sweep(const std::string& config_path, const std::string& param, const std::string& grid_spec,
              const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
  ScenarioConfig base;
  std::vector<double> grid;
  try {
    base = load_config(config_path);
    if (opts.tol) base.parameters.tol = *opts.tol;
    ScenarioConfig probe = base;
    set_parameter(probe, param, 1.0);
    grid = parse_grid(grid_spec);
  } catch (const ConfigError& e) {
    err << "error: " << describe(config_path, e) << '\n';
    return kExitInvalid;
  }

  const std::size_t n = grid.size();
  std::vector<RunReport> reports(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        ScenarioConfig c = base;
        set_parameter(c, param, grid[i]);
        reports[i] = run_scenario(c);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t jobs = std::min<std::size_t>(n, opts.jobs > 0 ? opts.jobs : hw);
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      err << "error: " << config_path << ": " << param << " = " << format_number(grid[i]) << ": "
          << errors[i] << '\n';
      return kExitInvalid;
    }
  }

  Table table;
  const auto& cols = reports.front().table.columns;
  const bool prefix = std::find(cols.begin(), cols.end(), param) == cols.end();
  if (prefix) table.columns.push_back(param);
  table.columns.insert(table.columns.end(), cols.begin(), cols.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& row : reports[i].table.rows) {
      std::vector<double> full;
      if (prefix) full.push_back(grid[i]);
      full.insert(full.end(), row.begin(), row.end());
      table.rows.push_back(std::move(full));
    }
  }

  const OutputFormat format =
      opts.format.value_or(base.output ? base.output->format : OutputFormat::csv);
  std::ostringstream body;
  if (format == OutputFormat::csv) {
    write_csv(table, body);
  } else {
    json j;
    j["param"] = param;
    j["grid"] = grid;
    j["table"] = {{"columns", table.columns}, {"rows", table.rows}};
    json list = json::array();
    for (const auto& r : reports) list.push_back(to_json(r));
    j["reports"] = std::move(list);
    body << j.dump(2) << '\n';
  }
  if (opts.output) {
    if (!write_output(*opts.output, body.str(), err)) return kExitInvalid;
  } else {
    out << body.str();
  }
  return kExitOk;
}

}  // namespace qfi::cli
