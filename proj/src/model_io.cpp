#include "hvac/model_io.hpp"

#include "hvac/errors.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace hvac {

namespace {

template <class T>
T field(const Json &j, const char *key, const std::string &where) {
  auto it = j.find(key);
  if (it == j.end())
    throw ValidationError(where + ": missing \"" + key + "\"");
  try {
    return it->get<T>();
  } catch (const Json::exception &) {
    throw ValidationError(where + "." + key + ": wrong type");
  }
}

// JSON has no NaN; unsupported curve points become null.
Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

} // namespace

Json model_to_json(const HybridModel &model, std::span<const IdResult> results) {
  Json modes = Json::array();
  for (const auto &m : model.modes)
    modes.push_back({{"index", m.index}, {"sat", m.sat}});
  Json zones = Json::array();
  for (std::size_t j = 0; j < model.zone_count(); ++j) {
    Json z{{"a", model.zones[j].a},
           {"b", model.zones[j].b},
           {"c", model.zones[j].c},
           {"q", model.q[j]}};
    if (j < results.size()) {
      z["objective"] = results[j].objective;
      z["residual_ss"] = results[j].residual_ss;
      z["transitions"] = results[j].transitions;
      z["ill_conditioned"] = results[j].ill_conditioned;
    }
    zones.push_back(std::move(z));
  }
  return Json{{"modes", modes}, {"zones", zones}};
}

HybridModel model_from_json(const Json &doc) {
  HybridModel m;
  const auto modes = field<Json>(doc, "modes", "model");
  if (!modes.is_array())
    throw ValidationError("model.modes: expected an array");
  std::vector<double> sats;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string where = "model.modes[" + std::to_string(i) + "]";
    if (field<int>(modes[i], "index", where) != static_cast<int>(i) + 1)
      throw ValidationError(where + ": modes must be listed in index order starting at 1");
    sats.push_back(field<double>(modes[i], "sat", where));
  }
  m.modes = make_modes(sats);
  const auto zones = field<Json>(doc, "zones", "model");
  if (!zones.is_array())
    throw ValidationError("model.zones: expected an array");
  for (std::size_t j = 0; j < zones.size(); ++j) {
    const std::string where = "model.zones[" + std::to_string(j) + "]";
    ZoneCoeffs z;
    z.a = field<std::vector<double>>(zones[j], "a", where);
    z.b = field<std::vector<double>>(zones[j], "b", where);
    z.c = field<std::vector<double>>(zones[j], "c", where);
    m.zones.push_back(std::move(z));
    m.q.push_back(field<double>(zones[j], "q", where));
  }
  m.validate();
  return m;
}

HybridModel load_model(const std::string &path) { return model_from_json(read_json_file(path)); }

Json zone_states_to_json(std::span<const ZoneState> states) {
  Json out = Json::array();
  for (const auto &s : states)
    out.push_back({{"temp", s.temp}, {"flow", s.flow}, {"reheat", s.reheat}});
  return out;
}

std::vector<ZoneState> zone_states_from_json(const Json &doc) {
  if (!doc.is_array())
    throw ValidationError("zone states: expected an array");
  std::vector<ZoneState> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "zone state [" + std::to_string(i) + "]";
    ZoneState s;
    s.temp = field<double>(doc[i], "temp", where);
    s.flow = field<double>(doc[i], "flow", where);
    s.reheat = field<double>(doc[i], "reheat", where);
    if (!std::isfinite(s.temp) || !std::isfinite(s.flow) || !std::isfinite(s.reheat))
      throw ValidationError(where + ": values must be finite");
    out.push_back(s);
  }
  return out;
}

Json planner_state_to_json(const PlannerState &state) {
  Json doc{{"corrections",
            {{"q_hat", state.corrections.q_hat},
             {"f_hat", state.corrections.f_hat},
             {"r_hat", state.corrections.r_hat}}},
           {"last_mode", state.last_mode},
           {"last_step", state.last_step},
           {"last_prediction", state.last_prediction}};
  doc["last_measured"] =
      state.last_measured ? zone_states_to_json(*state.last_measured) : Json(nullptr);
  return doc;
}

PlannerState planner_state_from_json(const Json &doc) {
  const std::string where = "planner";
  PlannerState s;
  const auto corr = field<Json>(doc, "corrections", where);
  s.corrections.q_hat = field<std::vector<double>>(corr, "q_hat", where + ".corrections");
  s.corrections.f_hat = field<std::vector<double>>(corr, "f_hat", where + ".corrections");
  s.corrections.r_hat = field<std::vector<double>>(corr, "r_hat", where + ".corrections");
  s.corrections.validate(s.corrections.q_hat.size());
  s.last_mode = field<int>(doc, "last_mode", where);
  s.last_step = field<std::size_t>(doc, "last_step", where);
  s.last_prediction = field<std::vector<double>>(doc, "last_prediction", where);
  auto it = doc.find("last_measured");
  if (it != doc.end() && !it->is_null())
    s.last_measured = zone_states_from_json(*it);
  return s;
}

Json plan_result_to_json(const PlanResult &result, bool with_table) {
  Json doc{{"mode", result.first_mode},
           {"sat", result.first_sat},
           {"cost", result.cost},
           {"feasible", result.feasible},
           {"sequence", result.best.blocks},
           {"block_lengths", result.best.lengths},
           {"sequence_index", result.best_index}};
  if (with_table) {
    Json table = Json::array();
    for (const auto &e : result.table)
      table.push_back({{"sequence", e.sequence.blocks},
                       {"cost", e.cost},
                       {"feasible", e.feasible},
                       {"violation", e.violation}});
    doc["table"] = std::move(table);
  }
  return doc;
}

Json characteristic_to_json(const Characteristic &c) {
  Json values = Json::array();
  for (double v : c.values)
    values.push_back(number_or_null(v));
  return Json{{"grid", c.grid}, {"values", values}, {"counts", c.counts}, {"bandwidth", c.bandwidth}};
}

Json bootstrap_to_json(const BootstrapResult &r) {
  Json hours = Json::array();
  for (const auto &h : r.hours)
    hours.push_back({h.lo, h.hi});
  Json pointwise = Json::array();
  for (const auto &p : r.pointwise)
    pointwise.push_back({{"oat", p.oat},
                         {"delta", p.delta},
                         {"ci", {p.ci_lo, p.ci_hi}},
                         {"p_value", p.p_value}});
  return Json{{"statistic", r.statistic == Statistic::Energy ? "energy_kwh_per_day" : "comfort_degF_h_per_day"},
              {"a", r.stat_a},
              {"b", r.stat_b},
              {"delta", r.delta},
              {"p_value", r.p_value},
              {"ci", {r.ci_lo, r.ci_hi}},
              {"resamples", r.resamples},
              {"hourly_oat_ranges", hours},
              {"curve_a", characteristic_to_json(r.curve_a)},
              {"curve_b", characteristic_to_json(r.curve_b)},
              {"supplementary_pointwise", pointwise},
              {"supplementary_curve_p_value", r.curve_p_value}};
}

Json report_to_json(const ComparisonReport &report) {
  return Json{{"hours_a", report.hours_a},
              {"hours_b", report.hours_b},
              {"energy", bootstrap_to_json(report.energy)},
              {"comfort", bootstrap_to_json(report.comfort)}};
}

void write_curve_csv(std::ostream &out, const BootstrapResult &r) {
  out << "T_o,A,B,count_A,count_B\n";
  out << std::setprecision(17);
  for (std::size_t g = 0; g < r.curve_a.grid.size(); ++g) {
    out << r.curve_a.grid[g] << ',';
    if (r.curve_a.supported(g))
      out << r.curve_a.values[g];
    out << ',';
    if (r.curve_b.supported(g))
      out << r.curve_b.values[g];
    out << ',' << r.curve_a.counts[g] << ',' << r.curve_b.counts[g] << '\n';
  }
}

void write_curve_csv(const std::string &path, const BootstrapResult &r) {
  std::ofstream out(path);
  if (!out)
    throw ValidationError("cannot write " + path);
  write_curve_csv(out, r);
}

} // namespace hvac
