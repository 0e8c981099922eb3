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

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "qfi/cli/runner.hpp"

int main(int argc, char** argv) {
  using namespace qfi::cli;

  CLI::App app{"Quantum Fisher information of measurement channels"};
  app.set_version_flag("--version", std::string(QFI_VERSION));
  app.require_subcommand(1);

  GlobalOptions opts;
  std::string format;
  app.add_option("--jobs", opts.jobs, "Worker threads for sweeps (default: logical cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--tol", opts.tol, "Override the verdict tolerance")->check(CLI::PositiveNumber);
  app.add_option("--output", opts.output, "Write the result to PATH instead of stdout");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one scenario config");
  run->add_option("config", config_path, "Scenario config (JSON)")->required();
  run->fallthrough();

  std::string param, grid;
  auto* sweep = app.add_subcommand("sweep", "Sweep one scalar parameter over a grid");
  sweep->add_option("config", config_path, "Scenario config (JSON)")->required();
  sweep->add_option("--param", param, "Scalar parameter name")->required();
  sweep->add_option("--grid", grid, "lin:a:b:n or log:a:b:n")->required();
  sweep->fallthrough();

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run a randomized property suite");
  verify->add_option("--suite", suite, "Suite name")->required()->check(CLI::IsMember(verify_suites()));
  verify->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }
  if (!format.empty()) opts.format = format == "csv" ? OutputFormat::csv : OutputFormat::json;

  if (*run) return cmd_run(config_path, opts, std::cout, std::cerr);
  if (*sweep) return cmd_sweep(config_path, param, grid, opts, std::cout, std::cerr);
  return cmd_verify(suite, opts, std::cout, std::cerr);
}
