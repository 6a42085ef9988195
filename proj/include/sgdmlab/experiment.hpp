#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "sgdmlab/config.hpp"

namespace sgdmlab {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kSoftwareVersion = "0.1.0";

using Json = nlohmann::ordered_json;

struct Report {
  Json json;
  bool pass = false;
};

// Runs the ensemble and every enabled check, then writes into cfg.output_dir:
//   report.json, trajectory_<i>.csv, coverage.csv (coverage check),
//   constants.csv (whenever the gamma constants are computed).
// Reruns of the same config produce byte-identical files.
Report run_experiment(const RunConfig& cfg, std::optional<int> workers = std::nullopt);

Json config_to_json(const RunConfig& cfg);

// One line per check plus the overall verdict.
std::string render_summary(const Json& report);

}  // namespace sgdmlab
