// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <numbers>
#include <string>

namespace layerflow {

struct RunConfig {
  int dim = 2;
  double depth = 1.0;
  double period = 2.0 * std::numbers::pi;
  int n_horizontal = 16;
  int n_vertical = 17;
  double mu = 1.0;
  double tau = 0.05;
  double horizon = 5.0;
  double gamma0 = 0.0;     // 0: half the fitted semigroup decay rate
  double sigma0 = 0.0;     // 0: same as gamma0
  double tolerance = 1e-8;
  int max_iter = 30;
  std::uint64_t seed = 1;
  std::string initial_data = "single_mode";  // zero | single_mode | random_solenoidal
  double amplitude = 0.0;  // W^2_q size of the initial data; 0: eps0 of the smallness gate
  int workers = 1;         // 0: all hardware threads
  double p = 2.0;
  double q = 2.0;
};

/// Flat `key = value` lines with `#` comments. Unknown keys, malformed lines
/// and out-of-range values throw Error with ErrorCode::Config.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace layerflow
