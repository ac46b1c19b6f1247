// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "layerflow/config.hpp"

namespace layerflow {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
};

struct ScenarioReport {
  std::string subcommand;
  std::vector<CheckResult> checks;
  std::vector<std::string> notes;   // measured constants, warnings, errors
  std::vector<std::string> files;   // written artifacts
  bool passed() const;
};

const std::vector<std::string>& scenario_names();

/// Runs one scenario, writes `<subcommand>.csv` (plus named aliases) and
/// summary.txt into out_dir. Numerical failures (divergence, degenerate
/// deformation) are recorded as failed checks; an unknown subcommand or an
/// unwritable directory throws.
ScenarioReport run_scenario(const std::string& subcommand, const RunConfig& cfg,
                            const std::string& out_dir);

}  // namespace layerflow
