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

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qfi/cli/config.hpp"
#include "qfi/cli/report.hpp"

namespace qfi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;  // parse or validation error
inline constexpr int kExitFailed = 2;   // an expected verdict or property failed

struct GlobalOptions {
  int jobs = 0;  // 0: hardware concurrency
  std::optional<double> tol;
  std::optional<std::string> output;
  std::optional<OutputFormat> format;
};

/// Runs one scenario. Throws ConfigError or qfi::Error on invalid input.
RunReport run_scenario(const ScenarioConfig& config);

int cmd_run(const std::string& config_path, const GlobalOptions& opts, std::ostream& out,
            std::ostream& err);

/// One row per grid point, in grid order, computed on `opts.jobs` workers.
int cmd_sweep(const std::string& config_path, const std::string& param, const std::string& grid,
              const GlobalOptions& opts, std::ostream& out, std::ostream& err);

const std::vector<std::string>& verify_suites();

/// Prints one line per property; exit 0 iff every property holds.
int cmd_verify(const std::string& suite, const GlobalOptions& opts, std::ostream& out,
               std::ostream& err);

}  // namespace qfi::cli
