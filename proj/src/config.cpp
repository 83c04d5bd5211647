#include "hvac/config.hpp"

#include "hvac/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace hvac {

namespace fs = std::filesystem;

namespace {

void check_keys(const Json &j, std::initializer_list<const char *> allowed, const std::string &where) {
  if (!j.is_object())
    throw ValidationError(where + ": expected a JSON object");
  for (const auto &[key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char *k) { return key == k; }))
      throw ValidationError(where + ": unknown key \"" + key + "\"");
  }
}

template <class T>
void read(const Json &j, const char *key, T &out, const std::string &where) {
  auto it = j.find(key);
  if (it == j.end())
    return;
  try {
    out = it->get<T>();
  } catch (const Json::exception &) {
    throw ValidationError(where + "." + key + ": wrong type");
  }
}

std::string resolve(const std::string &path, const std::string &base_dir) {
  const fs::path p(path);
  return p.is_absolute() ? p.string() : (fs::path(base_dir) / p).string();
}

Json pi_to_json(const PiGains &g) { return Json{{"kp", g.kp}, {"ki", g.ki}}; }

PiGains pi_from_json(const Json &j, const std::string &where) {
  check_keys(j, {"kp", "ki"}, where);
  PiGains g;
  read(j, "kp", g.kp, where);
  read(j, "ki", g.ki, where);
  return g;
}

Json zone_to_json(const PlantZone &z) {
  return Json{{"a", z.a},
              {"b", z.b},
              {"c", z.c},
              {"d", z.d},
              {"alpha", z.vav.alpha},
              {"omega", z.vav.omega},
              {"setpoint", z.vav.setpoint},
              {"band", z.vav.band},
              {"flow_pi", pi_to_json(z.flow_pi)},
              {"reheat_pi", pi_to_json(z.reheat_pi)},
              {"load",
               {{"base", z.load.base},
                {"occupied", z.load.occupied},
                {"occupied_from", z.load.occupied_from},
                {"occupied_to", z.load.occupied_to},
                {"solar", z.load.solar},
                {"solar_peak", z.load.solar_peak},
                {"day_sigma", z.load.day_sigma}}},
              {"initial_offset", z.initial_offset}};
}

PlantZone zone_from_json(const Json &j, const std::string &where) {
  check_keys(j,
             {"a", "b", "c", "d", "alpha", "omega", "setpoint", "band", "flow_pi", "reheat_pi", "load",
              "initial_offset"},
             where);
  PlantZone z;
  read(j, "a", z.a, where);
  read(j, "b", z.b, where);
  read(j, "c", z.c, where);
  read(j, "d", z.d, where);
  read(j, "alpha", z.vav.alpha, where);
  read(j, "omega", z.vav.omega, where);
  read(j, "setpoint", z.vav.setpoint, where);
  read(j, "band", z.vav.band, where);
  read(j, "initial_offset", z.initial_offset, where);
  if (j.contains("flow_pi"))
    z.flow_pi = pi_from_json(j["flow_pi"], where + ".flow_pi");
  if (j.contains("reheat_pi"))
    z.reheat_pi = pi_from_json(j["reheat_pi"], where + ".reheat_pi");
  if (j.contains("load")) {
    const Json &l = j["load"];
    const std::string w = where + ".load";
    check_keys(l, {"base", "occupied", "occupied_from", "occupied_to", "solar", "solar_peak", "day_sigma"},
               w);
    read(l, "base", z.load.base, w);
    read(l, "occupied", z.load.occupied, w);
    read(l, "occupied_from", z.load.occupied_from, w);
    read(l, "occupied_to", z.load.occupied_to, w);
    read(l, "solar", z.load.solar, w);
    read(l, "solar_peak", z.load.solar_peak, w);
    read(l, "day_sigma", z.load.day_sigma, w);
  }
  return z;
}

std::vector<double> per_mode(const Json &j, const char *key, std::size_t modes,
                             const std::string &where) {
  auto it = j.find(key);
  if (it == j.end())
    throw ValidationError(where + ": missing \"" + key + "\"");
  if (it->is_number())
    return std::vector<double>(modes, it->get<double>());
  std::vector<double> v;
  read(j, key, v, where);
  return v;
}

Prior prior_from_json(const Json &j, std::size_t modes) {
  const std::string where = "prior";
  check_keys(j, {"a_mean", "a_var", "b_mean", "b_var", "c_mean", "c_var"}, where);
  Prior p;
  p.a_mean = per_mode(j, "a_mean", modes, where);
  p.a_var = per_mode(j, "a_var", modes, where);
  p.b_mean = per_mode(j, "b_mean", modes, where);
  p.b_var = per_mode(j, "b_var", modes, where);
  p.c_mean = per_mode(j, "c_mean", modes, where);
  p.c_var = per_mode(j, "c_var", modes, where);
  return p;
}

} // namespace

// ---------------------------------------------------------------------------

std::vector<double> load_oat_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open OAT file " + path);
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  std::optional<TimePoint> prev;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected timestamp,degF");
    const std::string stamp = line.substr(0, comma);
    if (lineno == 1 && stamp.find('-') == std::string::npos)
      continue; // header
    const TimePoint t = parse_timestamp(stamp);
    if (prev && t - *prev != std::chrono::minutes{kSampleMinutes})
      throw ValidationError(path + ":" + std::to_string(lineno) +
                            ": OAT samples must be 15 minutes apart");
    prev = t;
    try {
      std::size_t used = 0;
      const std::string value = line.substr(comma + 1);
      out.push_back(std::stod(value, &used));
      if (!std::isfinite(out.back()))
        throw std::invalid_argument("non-finite");
    } catch (const std::exception &) {
      throw ValidationError(path + ":" + std::to_string(lineno) + ": bad temperature");
    }
  }
  if (out.empty())
    throw ValidationError("OAT file " + path + " has no samples");
  return out;
}

PlantConfig plant_config_from_json(const Json &doc, const std::string &base_dir) {
  const std::string where = "plant";
  check_keys(doc,
             {"anchor_sats", "zone_template", "zones", "oat", "energy", "noise_sigma", "sat_min",
              "sat_max"},
             where);
  PlantConfig pc;
  read(doc, "anchor_sats", pc.anchor_sats, where);
  read(doc, "noise_sigma", pc.noise_sigma, where);
  read(doc, "sat_min", pc.sat_min, where);
  read(doc, "sat_max", pc.sat_max, where);

  // Each zone entry is merged over the template.
  const Json tmpl = doc.value("zone_template", Json::object());
  if (!tmpl.is_object())
    throw ValidationError("plant.zone_template: expected a JSON object");
  auto zones = doc.find("zones");
  if (zones == doc.end() || !zones->is_array())
    throw ValidationError("plant.zones: expected an array");
  for (std::size_t i = 0; i < zones->size(); ++i) {
    Json z = tmpl;
    z.merge_patch((*zones)[i]);
    pc.zones.push_back(zone_from_json(z, "plant.zones[" + std::to_string(i) + "]"));
  }

  if (doc.contains("oat")) {
    const Json &o = doc["oat"];
    const std::string w = "plant.oat";
    check_keys(o, {"mean", "amplitude", "peak", "day_sigma", "samples", "csv"}, w);
    read(o, "mean", pc.oat.mean, w);
    read(o, "amplitude", pc.oat.amplitude, w);
    read(o, "peak", pc.oat.peak, w);
    read(o, "day_sigma", pc.oat.day_sigma, w);
    read(o, "samples", pc.oat.samples, w);
    if (o.contains("csv")) {
      std::string path;
      read(o, "csv", path, w);
      pc.oat.samples = load_oat_csv(resolve(path, base_dir));
    }
  }
  if (doc.contains("energy")) {
    const Json &e = doc["energy"];
    const std::string w = "plant.energy";
    check_keys(e, {"kappa1", "kappa2", "kappa3"}, w);
    read(e, "kappa1", pc.energy.kappa1, w);
    read(e, "kappa2", pc.energy.kappa2, w);
    read(e, "kappa3", pc.energy.kappa3, w);
  }
  pc.validate();
  return pc;
}

Json plant_config_to_json(const PlantConfig &cfg) {
  Json zones = Json::array();
  for (const auto &z : cfg.zones)
    zones.push_back(zone_to_json(z));
  Json oat{{"mean", cfg.oat.mean},
           {"amplitude", cfg.oat.amplitude},
           {"peak", cfg.oat.peak},
           {"day_sigma", cfg.oat.day_sigma}};
  if (!cfg.oat.samples.empty())
    oat["samples"] = cfg.oat.samples;
  return Json{{"anchor_sats", cfg.anchor_sats},
              {"zones", zones},
              {"oat", oat},
              {"energy",
               {{"kappa1", cfg.energy.kappa1},
                {"kappa2", cfg.energy.kappa2},
                {"kappa3", cfg.energy.kappa3}}},
              {"noise_sigma", cfg.noise_sigma},
              {"sat_min", cfg.sat_min},
              {"sat_max", cfg.sat_max}};
}

// ---------------------------------------------------------------------------

CostWeights RunConfig::resolved_weights() const {
  if (weights)
    return *weights;
  return CostWeights::tuned(vav_configs());
}

Prior RunConfig::resolved_prior() const {
  return prior ? *prior : Prior::defaults(mode_sats, gain_order);
}

double RunConfig::resolved_baseline_sat() const {
  return baseline_sat ? *baseline_sat : mode_sats.front();
}

CoeffConstraints RunConfig::constraints() const {
  CoeffConstraints c;
  c.order = gain_order;
  return c;
}

ExperimentSchedule RunConfig::schedule() const {
  return experiment_schedule(mode_sats, std::chrono::minutes{experiment.dwell_minutes},
                             std::chrono::minutes{experiment.start_minutes});
}

TimePoint RunConfig::start() const { return parse_date(start_date); }

void RunConfig::validate() const {
  make_modes(mode_sats);
  if (horizon == 0)
    throw ValidationError("horizon must be at least one step");
  if (weights)
    weights->validate();
  if (!(plan.temp_min < plan.temp_max))
    throw ValidationError("temperature limits are empty");
  if (!(plan.flow_margin >= 0.0))
    throw ValidationError("flow margin must be non-negative");
  resolved_prior().validate(mode_sats.size());
  plant.validate();
  for (double s : mode_sats)
    if (s < plant.sat_min || s > plant.sat_max)
      throw ValidationError("mode SAT outside the plant's equipment range");
  const double base = resolved_baseline_sat();
  if (base < plant.sat_min || base > plant.sat_max)
    throw ValidationError("baseline SAT outside the plant's equipment range");
  if (experiment.after_sat &&
      (*experiment.after_sat < plant.sat_min || *experiment.after_sat > plant.sat_max))
    throw ValidationError("post-experiment SAT outside the plant's equipment range");
  const auto sched = schedule();
  if (sched.blocks.back().first_sample + sched.blocks.back().samples >= kStepsPerDay)
    throw ValidationError("experiment schedule must end before midnight");
  start();
  if (bootstrap.resamples < 1000)
    throw ValidationError("bootstrap needs at least 1000 resamples");
  if (!(bootstrap.bandwidth > 0.0) || !(bootstrap.grid_spacing > 0.0))
    throw ValidationError("bootstrap bandwidth and grid spacing must be positive");
  if (!(bootstrap.confidence > 0.0 && bootstrap.confidence < 1.0))
    throw ValidationError("bootstrap confidence must lie in (0, 1)");
}

RunConfig run_config_from_json(const Json &doc, const std::string &base_dir) {
  const std::string where = "config";
  check_keys(doc,
             {"modes", "horizon", "weights", "temp_limits", "flow_margin", "prior", "gain_order",
              "experiment", "baseline_sat", "seed", "start_date", "days", "bootstrap", "plant"},
             where);
  RunConfig cfg;
  read(doc, "modes", cfg.mode_sats, where);
  read(doc, "horizon", cfg.horizon, where);
  read(doc, "seed", cfg.seed, where);
  read(doc, "start_date", cfg.start_date, where);
  read(doc, "flow_margin", cfg.plan.flow_margin, where);

  if (doc.contains("weights")) {
    const Json &w = doc["weights"];
    if (w.is_string()) {
      if (w.get<std::string>() != "auto")
        throw ValidationError("config.weights: expected \"auto\" or an object");
    } else {
      check_keys(w, {"lambda", "mu", "gamma"}, "config.weights");
      CostWeights cw;
      read(w, "lambda", cw.lambda, "config.weights");
      read(w, "mu", cw.mu, "config.weights");
      read(w, "gamma", cw.gamma, "config.weights");
      cfg.weights = cw;
    }
  }
  if (doc.contains("temp_limits")) {
    std::vector<double> lim;
    read(doc, "temp_limits", lim, where);
    if (lim.size() != 2)
      throw ValidationError("config.temp_limits: expected [min, max]");
    cfg.plan.temp_min = lim[0];
    cfg.plan.temp_max = lim[1];
  }
  if (doc.contains("gain_order")) {
    std::string order;
    read(doc, "gain_order", order, where);
    if (order == "verbatim")
      cfg.gain_order = GainOrder::Verbatim;
    else if (order == "flipped")
      cfg.gain_order = GainOrder::Flipped;
    else
      throw ValidationError("config.gain_order: expected \"verbatim\" or \"flipped\"");
  }
  if (doc.contains("prior")) {
    const Json &p = doc["prior"];
    if (p.is_string()) {
      if (p.get<std::string>() != "default")
        throw ValidationError("config.prior: expected \"default\" or an object");
    } else {
      cfg.prior = prior_from_json(p, cfg.mode_sats.size());
    }
  }
  if (doc.contains("experiment")) {
    const Json &e = doc["experiment"];
    const std::string w = "config.experiment";
    check_keys(e, {"dwell_minutes", "start_minutes", "after_sat"}, w);
    read(e, "dwell_minutes", cfg.experiment.dwell_minutes, w);
    read(e, "start_minutes", cfg.experiment.start_minutes, w);
    if (e.contains("after_sat")) {
      double s = 0.0;
      read(e, "after_sat", s, w);
      cfg.experiment.after_sat = s;
    }
  }
  if (doc.contains("baseline_sat")) {
    double s = 0.0;
    read(doc, "baseline_sat", s, where);
    cfg.baseline_sat = s;
  }
  if (doc.contains("days")) {
    const Json &d = doc["days"];
    check_keys(d, {"lbmpc", "default"}, "config.days");
    read(d, "lbmpc", cfg.days.lbmpc, "config.days");
    read(d, "default", cfg.days.baseline, "config.days");
  }
  if (doc.contains("bootstrap")) {
    const Json &b = doc["bootstrap"];
    const std::string w = "config.bootstrap";
    check_keys(b, {"resamples", "seed", "bandwidth", "grid_spacing", "confidence"}, w);
    read(b, "resamples", cfg.bootstrap.resamples, w);
    read(b, "seed", cfg.bootstrap.seed, w);
    read(b, "bandwidth", cfg.bootstrap.bandwidth, w);
    read(b, "grid_spacing", cfg.bootstrap.grid_spacing, w);
    read(b, "confidence", cfg.bootstrap.confidence, w);
  }
  if (!doc.contains("plant"))
    throw ValidationError("config: missing \"plant\"");
  const Json &p = doc["plant"];
  if (p.is_string()) {
    const std::string path = resolve(p.get<std::string>(), base_dir);
    cfg.plant = plant_config_from_json(read_json_file(path), fs::path(path).parent_path().string());
  } else {
    cfg.plant = plant_config_from_json(p, base_dir);
  }
  cfg.validate();
  return cfg;
}

Json run_config_to_json(const RunConfig &cfg) {
  Json doc{{"modes", cfg.mode_sats},
           {"horizon", cfg.horizon},
           {"temp_limits", {cfg.plan.temp_min, cfg.plan.temp_max}},
           {"flow_margin", cfg.plan.flow_margin},
           {"gain_order", cfg.gain_order == GainOrder::Verbatim ? "verbatim" : "flipped"},
           {"experiment",
            {{"dwell_minutes", cfg.experiment.dwell_minutes},
             {"start_minutes", cfg.experiment.start_minutes}}},
           {"seed", cfg.seed},
           {"start_date", cfg.start_date},
           {"days", {{"lbmpc", cfg.days.lbmpc}, {"default", cfg.days.baseline}}},
           {"bootstrap",
            {{"resamples", cfg.bootstrap.resamples},
             {"seed", cfg.bootstrap.seed},
             {"bandwidth", cfg.bootstrap.bandwidth},
             {"grid_spacing", cfg.bootstrap.grid_spacing},
             {"confidence", cfg.bootstrap.confidence}}},
           {"plant", plant_config_to_json(cfg.plant)}};
  if (cfg.weights)
    doc["weights"] = {{"lambda", cfg.weights->lambda},
                      {"mu", cfg.weights->mu},
                      {"gamma", cfg.weights->gamma}};
  else
    doc["weights"] = "auto";
  if (cfg.prior)
    doc["prior"] = {{"a_mean", cfg.prior->a_mean}, {"a_var", cfg.prior->a_var},
                    {"b_mean", cfg.prior->b_mean}, {"b_var", cfg.prior->b_var},
                    {"c_mean", cfg.prior->c_mean}, {"c_var", cfg.prior->c_var}};
  else
    doc["prior"] = "default";
  if (cfg.experiment.after_sat)
    doc["experiment"]["after_sat"] = *cfg.experiment.after_sat;
  if (cfg.baseline_sat)
    doc["baseline_sat"] = *cfg.baseline_sat;
  return doc;
}

RunConfig load_run_config(const std::string &path) {
  return run_config_from_json(read_json_file(path), fs::path(path).parent_path().string());
}

Json read_json_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error &e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_json_file(const std::string &path, const Json &doc) {
  std::ofstream out(path);
  if (!out)
    throw ValidationError("cannot write " + path);
  out << doc.dump(2) << '\n';
}

std::string config_hash(const Json &doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json make_manifest(const std::string &command, const Json &config, std::uint64_t seed) {
  return Json{{"tool", "hvac-lbmpc"},
              {"version", HVAC_LBMPC_VERSION},
              {"command", command},
              {"config_hash", config_hash(config)},
              {"seed", seed}};
}

} // namespace hvac
