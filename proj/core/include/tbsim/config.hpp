#pragma once

#include "tbsim/analysis.hpp"
#include "tbsim/contact.hpp"
#include "tbsim/gait.hpp"
#include "tbsim/robot_params.hpp"
#include "tbsim/sim.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace tbsim {

inline constexpr int kConfigVersion = 1;

/// All tunables in one place, mirrored one-to-one by the JSON config file
/// sections {robot, contact, gait, controller, sim, analysis}.
struct UnifiedConfig {
  int version = kConfigVersion;
  RobotParams robot;
  ContactParams contact;
  GaitConfig gait;
  ControllerGains controller;
  SimConfig sim;
  AnalysisConfig analysis;

  void validate(const std::string& where = "<config>") const;
};

UnifiedConfig default_config();

/// Shipped scenario presets (standing start on the ground, scenario-specific
/// duration and initial pose). The acceptance suite runs on these without
/// external files.
UnifiedConfig scenario_config(Scenario scenario);

Scenario scenario_from_name(const std::string& name);  // throws ConfigError
std::string scenario_name(Scenario scenario);

/// Parses, applies defaults, rejects unknown keys, validates invariants.
UnifiedConfig load_config(const std::string& path);

/// Overlay a JSON document onto `base`. Unknown keys raise ConfigError with
/// the offending dotted path.
UnifiedConfig config_from_json(const nlohmann::json& j, const UnifiedConfig& base,
                               const std::string& where = "<json>");

nlohmann::json config_to_json(const UnifiedConfig& cfg);

void save_config(const UnifiedConfig& cfg, const std::string& path);

/// Canonical serialization (sorted keys, shortest round-trip numbers).
std::string canonical_config_string(const UnifiedConfig& cfg);

/// FNV-1a 64-bit hash of the canonical serialization, hex encoded.
std::string config_hash(const UnifiedConfig& cfg);

/// simulate() with the log metadata stamped (scenario name, config hash,
/// embedded canonical config, tool version).
TrajectoryLog run_scenario(const UnifiedConfig& cfg, Scenario scenario);

}  // namespace tbsim
