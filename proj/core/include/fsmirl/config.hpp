#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "fsmirl/experiment.hpp"

namespace fsmirl {

struct ExperimentConfig {
  TrainConfig train;
  DataSpec data;
  ShiftSpec shift;
  int seeds = 3;
  int threads = 1;
  bool wallclock = true;
};

// Reads a config file. JSON when the first non-space byte is '{', otherwise
// the TOML subset: [section] and [dotted.section] headers, key = value with
// string/number/boolean scalars, # comments.
nlohmann::json parse_config_file(const std::string& path);

// TOML subset text to the equivalent nested JSON. path only labels errors.
nlohmann::json parse_toml_subset(const std::string& text,
                                 const std::string& path);

// Overlays present keys onto cfg; absent keys keep their current values.
void apply_config(ExperimentConfig& cfg, const nlohmann::json& j);

// Canonical snapshot of every field, keys sorted. Equal configs dump to
// equal bytes, so the snapshot hash identifies the invocation.
nlohmann::json config_snapshot(const ExperimentConfig& cfg);

// Stamps report.config and report.config_hash from cfg.
void finalize_report(Report& report, const ExperimentConfig& cfg);

}  // namespace fsmirl
