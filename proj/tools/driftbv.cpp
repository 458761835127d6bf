#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driftbv/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"driftbv: drift-diffusion solver and estimate-audit harness"};
  app.require_subcommand(1);

  std::string cfg;
  std::string axis;
  std::vector<double> values;

  auto* run_cmd = app.add_subcommand("run", "execute one evolution run and write artifacts");
  run_cmd->add_option("config", cfg, "config file or preset name")->required();

  auto* verify_cmd =
      app.add_subcommand("verify", "run the full estimate-audit battery for a config");
  verify_cmd->add_option("config", cfg, "config file or preset name")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "repeat a run along one parameter axis");
  sweep_cmd->add_option("config", cfg, "config file or preset name")->required();
  sweep_cmd->add_option("--axis", axis, "eps | delta | cells | cutoff.h")->required();
  sweep_cmd->add_option("--values", values, "axis values")->required()->delimiter(',');

  auto* presets_cmd = app.add_subcommand("presets", "list shipped presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (presets_cmd->parsed()) {
    for (const auto& name : driftbv::preset_names()) std::printf("%s\n", name.c_str());
    return 0;
  }

  driftbv::RunOutcome out;
  if (run_cmd->parsed())
    out = driftbv::cmd_run(cfg);
  else if (verify_cmd->parsed())
    out = driftbv::cmd_verify(cfg);
  else
    out = driftbv::cmd_sweep(cfg, axis, values);

  if (!out.artifact_dir.empty()) std::printf("artifacts: %s\n", out.artifact_dir.c_str());
  std::printf("%s\n", out.message.c_str());
  return out.exit_code;
}
