#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftbv/analysis.hpp"
#include "driftbv/cutoff.hpp"
#include "driftbv/evolution.hpp"
#include "driftbv/fields.hpp"
#include "driftbv/grid.hpp"

namespace driftbv {

// A fully parsed run configuration plus its normalized echo. Parsing the echo
// reproduces the same normalized document (round-trip identity), and a run is
// a deterministic function of it.
struct RunConfig {
  EvolutionConfig evolution;
  std::optional<EtaProfile> cutoff_profile;  // BV audits enabled when present
  double audit_slack = 0.05;
  int stationary_battery = 12;
  std::string output_dir = "out";
  uint64_t seed = 1234;

  nlohmann::json echo;  // normalized config document

  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig from_file(const std::string& path);
};

DriftField parse_field(const nlohmann::json& spec, int dim);
ScalarField parse_scalar(const nlohmann::json& spec, int dim);
nlohmann::json field_to_json(const DriftField& f);
nlohmann::json scalar_to_json(const ScalarField& f);

// Shipped scenario presets; throws ConfigError for unknown names.
std::vector<std::string> preset_names();
nlohmann::json preset_config(const std::string& name);
bool is_preset(const std::string& name);

}  // namespace driftbv
