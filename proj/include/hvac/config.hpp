#pragma once

#include "hvac/evaluation.hpp"
#include "hvac/lbmpc.hpp"
#include "hvac/plant.hpp"
#include "hvac/sysid.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hvac {

using Json = nlohmann::json;

struct ExperimentOptions {
  int dwell_minutes = 120;
  int start_minutes = 0;
  std::optional<double> after_sat; // defaults to the baseline SAT
};

struct DayCounts {
  std::size_t lbmpc = 8;
  std::size_t baseline = 22;
};

/// Everything a run needs. Built from defaults, then a JSON config file,
/// then command-line flags.
struct RunConfig {
  std::vector<double> mode_sats{52.0, 58.0, 62.0};
  std::size_t horizon = 16;
  std::optional<CostWeights> weights; // empty means the tuned formula
  PlanOptions plan;
  std::optional<Prior> prior;         // empty means Prior::defaults
  GainOrder gain_order = GainOrder::Verbatim;
  ExperimentOptions experiment;
  std::optional<double> baseline_sat; // defaults to the coldest mode
  std::uint64_t seed = 1;
  std::string start_date = "2024-07-01";
  DayCounts days;
  BootstrapOptions bootstrap;
  PlantConfig plant;

  /// Controller-side VAV configs, taken from the plant's zones.
  std::vector<VavConfig> vav_configs() const { return plant.vav_configs(); }
  CostWeights resolved_weights() const;
  Prior resolved_prior() const;
  double resolved_baseline_sat() const;
  CoeffConstraints constraints() const;
  ExperimentSchedule schedule() const;
  TimePoint start() const;

  /// Cross-checks every field; throws ValidationError.
  void validate() const;
};

/// Reads a run config document. Relative paths inside it (plant file, OAT
/// CSV) resolve against `base_dir`. Unknown keys are rejected.
RunConfig run_config_from_json(const Json &doc, const std::string &base_dir = ".");
Json run_config_to_json(const RunConfig &cfg);
RunConfig load_run_config(const std::string &path);

PlantConfig plant_config_from_json(const Json &doc, const std::string &base_dir = ".");
Json plant_config_to_json(const PlantConfig &cfg);

/// Two-column CSV (timestamp, degF) of outside air temperatures.
std::vector<double> load_oat_csv(const std::string &path);

Json read_json_file(const std::string &path);
void write_json_file(const std::string &path, const Json &doc);

/// 64-bit FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const Json &doc);

/// Provenance block embedded in every output.
Json make_manifest(const std::string &command, const Json &config, std::uint64_t seed);

} // namespace hvac
