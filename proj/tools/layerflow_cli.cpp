// SPDX-License-Identifier: Apache-2.0
//
// layerflow <subcommand> --config <path> --out <dir> [--seed <u64>]
// Exit codes: 0 all checks pass, 1 a check failed or the run errored,
// 2 bad usage or configuration.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "layerflow/layerflow.h"

namespace {

const char* describe(const std::string& name) {
  if (name == "verify-kernels") return "residue kernels against quadrature, symbol bounds";
  if (name == "weak-dn") return "weak Dirichlet-Neumann solver on a manufactured potential";
  if (name == "helmholtz") return "Helmholtz projection of random fields";
  if (name == "resolvent-sweep") return "Stokes resolvent over a sector of lambda values";
  if (name == "semigroup-decay") return "decay of the Stokes semigroup";
  if (name == "linear-mr") return "linear problem: four-way split and regularity ratio";
  if (name == "global-solve") return "Picard iteration for the nonlinear problem";
  return "";
}

int fail(lf_status st, const char* what) {
  std::fprintf(stderr, "layerflow: %s: %s\n", what, lf_last_error());
  return st == LF_ERR_CONFIG || st == LF_ERR_INVALID_ARGUMENT ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free-surface layer flow solver and verification scenarios"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;

  for (int i = 0; i < lf_scenario_count(); ++i) {
    CLI::App* sub = app.add_subcommand(lf_scenario_name(i), describe(lf_scenario_name(i)));
    sub->add_option("--config", config_path, "key = value configuration file");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the configured seed");
  }
  app.add_flag_callback("--version", [] {
    std::printf("layerflow %s\n", lf_version());
    std::exit(0);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  lf_config* cfg = nullptr;
  lf_status st = config_path.empty() ? lf_config_parse("", &cfg) : lf_config_load(config_path.c_str(), &cfg);
  if (st != LF_OK) return fail(LF_ERR_CONFIG, "configuration");
  if (seed) lf_config_set_seed(cfg, *seed);

  int passed = 0;
  st = lf_run_scenario(subcommand.c_str(), cfg, out_dir.c_str(), &passed);
  lf_config_free(cfg);
  if (st != LF_OK) return fail(st, subcommand.c_str());

  std::FILE* summary = std::fopen((out_dir + "/summary.txt").c_str(), "r");
  if (summary) {
    char line[512];
    while (std::fgets(line, sizeof line, summary)) std::fputs(line, stdout);
    std::fclose(summary);
  }
  return passed ? 0 : 1;
}
