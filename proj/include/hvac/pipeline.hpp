#pragma once

#include "hvac/config.hpp"
#include "hvac/evaluation.hpp"
#include "hvac/plant.hpp"
#include "hvac/sysid.hpp"

#include <cstdint>
#include <vector>

namespace hvac {

enum class ControllerKind { Baseline, Lbmpc, Experiment };

const char *controller_name(ControllerKind kind);

/// Simulates `days` independent days. Day d starts at midnight of
/// start_date + day_offset + d and draws from derive_seed(stream, d), where
/// the stream seed depends on `seed` and the controller, so results do not
/// depend on how the days are scheduled across threads.
std::vector<TraceSet> simulate_days(const RunConfig &cfg, ControllerKind kind, std::size_t days,
                                    std::uint64_t seed, const HybridModel *model = nullptr,
                                    std::size_t day_offset = 0);

struct Identification {
  HybridModel model;
  std::vector<IdResult> results;
  std::size_t first_row = 0; // trace row of the first experiment sample
};

/// Locates the experiment schedule in `trace`, checks that the commanded SATs
/// match it, and identifies every zone.
Identification identify_from_trace(const RunConfig &cfg, const TraceSet &trace);

std::vector<HourlyRecord> hourly_records(const RunConfig &cfg, std::span<const TraceSet> days);

struct PipelineResult {
  TraceSet experiment;
  Identification identification;
  std::vector<TraceSet> lbmpc;
  std::vector<TraceSet> baseline;
  ComparisonReport report; // A = baseline, B = LBMPC
  double seconds = 0.0;
};

/// Experiment day, identification, LBMPC and baseline days, comparison.
PipelineResult run_pipeline(const RunConfig &cfg);

} // namespace hvac
