#pragma once

#include <string>
#include <vector>

#include "driftbv/config.hpp"

namespace driftbv {

// Exit codes shared by the CLI: 0 success, 1 solver/audit failure, 2 config error.

struct RunOutcome {
  int exit_code = 0;
  std::string artifact_dir;
  std::string message;
};

// Resolves `path_or_preset` (preset names win over paths), executes the
// evolution run with the enabled audits, writes the artifact directory:
// config.json echo, steps.csv, audits.csv, tv_series.csv, report.json and
// snapshot_%04d.csv. The DRIFTBV_OUT environment variable overrides the
// output root.
RunOutcome cmd_run(const std::string& path_or_preset, const std::string& out_root = "");

// Full verification battery: assumption audits, the randomized stationary
// battery, per-step estimate audits, the energy ledger, the L^q bounds and
// (when a cutoff is configured) the BV audits. Exit 0 iff everything is
// `pass` or `pass_with_slack` under the configured ceiling.
RunOutcome cmd_verify(const std::string& path_or_preset, const std::string& out_root = "");

// Parameter sweep over axis in {eps, delta, cells, cutoff.h}; writes sweep.csv
// with per-value summaries and inter-run distances.
RunOutcome cmd_sweep(const std::string& path_or_preset, const std::string& axis,
                     const std::vector<double>& values, const std::string& out_root = "");

RunConfig load_config(const std::string& path_or_preset);

}  // namespace driftbv
