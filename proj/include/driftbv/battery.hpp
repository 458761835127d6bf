#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driftbv/stationary.hpp"

namespace driftbv {

// Randomized stationary estimate battery: each scenario draws a graph from
// {Identity, PowerLaw(2), Sign}, a catalog drift with an admissible lambda and
// a piecewise-smooth source, solves the stationary problem and audits the
// full set of stationary a-priori inequalities (L^q for q in {1,2,inf}, the
// energy estimate, k-contractions at random thresholds, positivity on
// nonnegative sources).
struct BatteryScenarioResult {
  int scenario = 0;
  std::string description;
  std::vector<EstimateAudit> audits;
  bool all_passed = true;
};

struct BatteryResult {
  int scenarios = 0;
  int audits_total = 0;
  int audits_failed = 0;
  double worst_ratio = 0.0;
  std::vector<BatteryScenarioResult> details;
  bool all_passed() const { return audits_failed == 0; }
};

BatteryResult run_stationary_battery(int n_scenarios, uint64_t seed, int k_samples = 5);

}  // namespace driftbv
