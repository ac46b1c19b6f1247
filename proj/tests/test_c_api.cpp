// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "layerflow/layerflow.h"

constexpr double kPi = std::numbers::pi;

TEST_CASE("status codes and last error") {
  double e = 0, o = 0;
  CHECK(lf_residue_kernel_pair(1.0, 1.0, &e, &o) == LF_OK);
  CHECK(std::string(lf_last_error()).empty());
  CHECK(e == doctest::Approx(kPi * std::exp(-1.0)));
  CHECK(o == doctest::Approx(-kPi * std::exp(-1.0)));
  CHECK(lf_residue_kernel_pair(0.0, 1.0, &e, &o) == LF_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(lf_last_error()) > 0);
  CHECK(lf_residue_kernel_pair(1.0, 1.0, nullptr, &o) == LF_ERR_INVALID_ARGUMENT);

  double h = 0;
  CHECK(lf_layer_harmonic_kernel(2, 0.3, 0.5, 1.0, 2.0, &h) == LF_OK);
  CHECK(h == doctest::Approx(std::exp(-0.8) / (1 + std::exp(-4.0))));
  CHECK(lf_layer_harmonic_kernel(0, 0.3, 0.5, 1.0, 2.0, &h) == LF_ERR_INVALID_ARGUMENT);

  double d0 = 0, e0 = 0;
  CHECK(lf_smallness_gate(1, 1, &d0, &e0) == LF_OK);
  CHECK(d0 == doctest::Approx(1.0 / 16));
  CHECK(e0 == doctest::Approx(1.0 / 32));
  CHECK(lf_smallness_gate(-1, 1, &d0, &e0) == LF_ERR_INVALID_ARGUMENT);

  std::vector<double> t, v;
  for (int n = 0; n < 40; ++n) {
    t.push_back(0.1 * n);
    v.push_back(std::exp(-0.3 * 0.1 * n));
  }
  double rate = 0, r2 = 0;
  CHECK(lf_decay_fit(t.data(), v.data(), t.size(), 0.2, &rate, &r2) == LF_OK);
  CHECK(rate == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(lf_decay_fit(t.data(), v.data(), 5, 0.0, &rate, &r2) == LF_ERR_INVALID_ARGUMENT);
}

TEST_CASE("config parsing") {
  lf_config* cfg = nullptr;
  CHECK(lf_config_parse("dim = 3\n# comment\nmu = 0.5 # trailing\n", &cfg) == LF_OK);
  lf_config_free(cfg);
  CHECK(lf_config_parse("dim = 4\n", &cfg) == LF_ERR_CONFIG);
  CHECK(lf_config_parse("colour = red\n", &cfg) == LF_ERR_CONFIG);
  CHECK(lf_config_parse("tau 0.1\n", &cfg) == LF_ERR_CONFIG);
  CHECK(lf_config_parse("tau = fast\n", &cfg) == LF_ERR_CONFIG);
  CHECK(lf_config_parse("initial_data = vortex\n", &cfg) == LF_ERR_CONFIG);
  CHECK(lf_config_load("/nonexistent/layerflow.conf", &cfg) == LF_ERR_CONFIG);
}

TEST_CASE("grid fields through the C interface") {
  lf_grid* g = nullptr;
  CHECK(lf_grid_create(2, 1.0, 2 * kPi, 7, 9, &g) == LF_ERR_INVALID_ARGUMENT);
  REQUIRE(lf_grid_create(2, 1.0, 2 * kPi, 32, 33, &g) == LF_OK);
  std::size_t n = 0;
  REQUIRE(lf_grid_sample_count(g, &n) == LF_OK);
  CHECK(n == 32 * 33);
  std::vector<double> xy(2 * n);
  REQUIRE(lf_grid_coordinates(g, xy.data()) == LF_OK);
  // gradient of sin(x) cos(pi z / 2) recovers the potential
  std::vector<double> f(2 * n), u(n), sol(2 * n), pot(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double x = xy[2 * s], z = xy[2 * s + 1];
    f[s] = std::cos(x) * std::cos(kPi * z / 2);
    f[n + s] = -kPi / 2 * std::sin(x) * std::sin(kPi * z / 2);
  }
  REQUIRE(lf_solve_weak_dn(g, f.data(), u.data()) == LF_OK);
  double err = 0;
  for (std::size_t s = 0; s < n; ++s)
    err = std::max(err, std::abs(u[s] - std::sin(xy[2 * s]) * std::cos(kPi * xy[2 * s + 1] / 2)));
  CHECK(err < 1e-8);
  REQUIRE(lf_helmholtz_project(g, f.data(), sol.data(), pot.data()) == LF_OK);
  double smax = 0;
  for (double s : sol) smax = std::max(smax, std::abs(s));
  CHECK(smax < 1e-8);
  lf_grid_free(g);
}

TEST_CASE("scenario run through the C interface") {
  lf_config* cfg = nullptr;
  REQUIRE(lf_config_parse("initial_data = zero\nhorizon = 1\n", &cfg) == LF_OK);
  const auto dir = std::filesystem::temp_directory_path() / "layerflow_capi_test";
  int passed = 0;
  REQUIRE(lf_run_scenario("global-solve", cfg, dir.c_str(), &passed) == LF_OK);
  CHECK(passed == 1);
  std::ifstream summary(dir / "summary.txt");
  std::string text((std::istreambuf_iterator<char>(summary)), {});
  CHECK(text.find("CHECK converged_in_one PASS 1") != std::string::npos);
  CHECK(lf_run_scenario("no-such-thing", cfg, dir.c_str(), &passed) == LF_ERR_INVALID_ARGUMENT);
  lf_config_free(cfg);
  CHECK(lf_scenario_count() == 7);
  CHECK(std::string(lf_scenario_name(0)) == "verify-kernels");
  CHECK(lf_scenario_name(7) == nullptr);
}
