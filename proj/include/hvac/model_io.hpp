#pragma once

#include "hvac/config.hpp"
#include "hvac/evaluation.hpp"
#include "hvac/lbmpc.hpp"
#include "hvac/sysid.hpp"

#include <iosfwd>
#include <span>
#include <string>

namespace hvac {

/// Identified model document. `results`, when given, adds per-zone
/// residual reports.
Json model_to_json(const HybridModel &model, std::span<const IdResult> results = {});
HybridModel model_from_json(const Json &doc);
HybridModel load_model(const std::string &path);

Json zone_states_to_json(std::span<const ZoneState> states);
std::vector<ZoneState> zone_states_from_json(const Json &doc);

Json planner_state_to_json(const PlannerState &state);
PlannerState planner_state_from_json(const Json &doc);

Json plan_result_to_json(const PlanResult &result, bool with_table);

Json characteristic_to_json(const Characteristic &c);
Json bootstrap_to_json(const BootstrapResult &r);
Json report_to_json(const ComparisonReport &report);

/// Plot-ready curve table: T_o, A, B, count_A, count_B. Unsupported points
/// are left empty.
void write_curve_csv(std::ostream &out, const BootstrapResult &r);
void write_curve_csv(const std::string &path, const BootstrapResult &r);

} // namespace hvac
