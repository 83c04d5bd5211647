// Command-line front end: schedule, identify, simulate, control-step,
// compare and pipeline.

#include "hvac/config.hpp"
#include "hvac/errors.hpp"
#include "hvac/model_io.hpp"
#include "hvac/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace hvac;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

// Flags shared by commands that read a run config. Set flags are patched
// into the config document before it is parsed, so the manifest hash covers
// the effective configuration.
struct ConfigFlags {
  std::string path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;
  std::vector<double> modes;
  std::string gain_order;
  std::optional<std::size_t> resamples;
  std::optional<double> bandwidth;

  void add(CLI::App *cmd, bool required) {
    auto *opt = cmd->add_option("-c,--config", path, "run configuration (JSON)");
    if (required)
      opt->required();
    cmd->add_option("--seed", seed, "base random seed");
    cmd->add_option("--horizon", horizon, "planning horizon in 15-minute steps");
    cmd->add_option("--modes", modes, "SAT mode set, degF")->delimiter(',');
    cmd->add_option("--gain-order", gain_order, "airflow-gain ordering: verbatim or flipped")
        ->check(CLI::IsMember({"verbatim", "flipped"}));
    cmd->add_option("--resamples", resamples, "bootstrap resamples");
    cmd->add_option("--bandwidth", bandwidth, "kernel bandwidth, degF");
  }

  Json document() const {
    Json doc = read_json_file(path);
    if (seed)
      doc["seed"] = *seed;
    if (horizon)
      doc["horizon"] = *horizon;
    if (!modes.empty())
      doc["modes"] = modes;
    if (!gain_order.empty())
      doc["gain_order"] = gain_order;
    if (resamples)
      doc["bootstrap"]["resamples"] = *resamples;
    if (bandwidth)
      doc["bootstrap"]["bandwidth"] = *bandwidth;
    return doc;
  }

  std::string base_dir() const { return fs::path(path).parent_path().string(); }
};

void ensure_dir(const std::string &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw ValidationError("cannot create directory " + dir + ": " + ec.message());
}

std::string day_file(const std::string &dir, const char *name, std::size_t d) {
  std::ostringstream oss;
  oss << name << "_day" << std::setw(3) << std::setfill('0') << d << ".csv";
  return (fs::path(dir) / oss.str()).string();
}

std::vector<TraceSet> read_traces(const std::vector<std::string> &paths) {
  std::vector<TraceSet> out;
  for (const auto &p : paths) {
    try {
      out.push_back(read_trace_csv(p));
    } catch (const ValidationError &e) {
      throw ValidationError(p + ": " + e.what());
    }
  }
  return out;
}

int cmd_schedule(const std::vector<double> &modes, int dwell, int start, const std::string &date,
                 const std::string &out_path) {
  const auto sched = experiment_schedule(modes, std::chrono::minutes{dwell}, std::chrono::minutes{start});
  const TimePoint day = parse_date(date);
  const Json params{{"modes", modes}, {"dwell_minutes", dwell}, {"start_minutes", start}, {"date", date}};
  std::ostringstream oss;
  oss << "# manifest: " << make_manifest("schedule", params, 0).dump() << '\n';
  oss << "timestamp,mode,SAT\n";
  for (const auto &c : sched.commands())
    oss << format_timestamp(day + c.time) << ',' << c.mode << ',' << c.sat << '\n';
  if (out_path.empty()) {
    std::cout << oss.str();
  } else {
    std::ofstream f(out_path);
    if (!f)
      throw ValidationError("cannot write " + out_path);
    f << oss.str();
  }
  return 0;
}

int cmd_identify(const ConfigFlags &flags, const std::string &trace_path, const std::string &out_path) {
  const Json doc = flags.document();
  const RunConfig cfg = run_config_from_json(doc, flags.base_dir());
  const TraceSet trace = read_traces({trace_path}).front();
  const Identification id = identify_from_trace(cfg, trace);
  Json out = model_to_json(id.model, id.results);
  out["manifest"] = make_manifest("identify", doc, cfg.seed);
  write_json_file(out_path, out);
  for (std::size_t j = 0; j < id.results.size(); ++j)
    if (id.results[j].ill_conditioned)
      std::cerr << "warning: zone " << j + 1
                << " data is ill-conditioned; the estimate leans on the prior\n";
  std::cout << "identified " << id.model.zone_count() << " zones -> " << out_path << '\n';
  return 0;
}

int cmd_simulate(const ConfigFlags &flags, const std::string &controller, std::size_t days,
                 const std::string &model_path, const std::string &out_dir) {
  const Json doc = flags.document();
  const RunConfig cfg = run_config_from_json(doc, flags.base_dir());
  ControllerKind kind = ControllerKind::Baseline;
  if (controller == "lbmpc")
    kind = ControllerKind::Lbmpc;
  else if (controller == "experiment")
    kind = ControllerKind::Experiment;

  std::optional<HybridModel> model;
  if (kind == ControllerKind::Lbmpc) {
    if (model_path.empty())
      throw ValidationError("simulate --controller lbmpc needs --model");
    if (!fs::exists(model_path))
      throw ValidationError("model file not found: " + model_path);
    model = load_model(model_path);
  }
  if (days == 0) {
    std::cout << "0 days requested; nothing written\n";
    return 0;
  }
  ensure_dir(out_dir);
  auto traces = simulate_days(cfg, kind, days, cfg.seed, model ? &*model : nullptr);
  Json manifest = make_manifest("simulate", doc, cfg.seed);
  manifest["controller"] = controller;
  for (std::size_t d = 0; d < traces.size(); ++d) {
    manifest["day"] = d;
    traces[d].manifest = manifest.dump();
    const std::string path = day_file(out_dir, controller.c_str(), d);
    write_trace_csv(path, traces[d]);
    std::cout << path << "  " << std::fixed << std::setprecision(1) << traces[d].total_energy()
              << " kWh\n";
  }
  return 0;
}

int cmd_control_step(const ConfigFlags &flags, const std::string &model_path,
                     const std::string &state_path, const std::string &out_path, bool table) {
  const Json doc = flags.document();
  const RunConfig cfg = run_config_from_json(doc, flags.base_dir());
  const HybridModel model = load_model(model_path);
  if (model.zone_count() != cfg.plant.zone_count())
    throw ValidationError("model and config zone counts differ");
  const Json state = read_json_file(state_path);
  if (!state.contains("step") || !state.contains("measured") || !state.contains("oat"))
    throw ValidationError(state_path + ": state needs \"step\", \"measured\" and \"oat\"");
  const auto step = state["step"].get<std::size_t>();
  const auto measured = zone_states_from_json(state["measured"]);
  const auto oat = state["oat"].get<std::vector<double>>();

  LbmpcController ctl(model, cfg.vav_configs(), cfg.resolved_weights(), cfg.horizon, cfg.plan);
  if (state.contains("planner") && !state["planner"].is_null())
    ctl.restore(planner_state_from_json(state["planner"]));
  const PlanResult res = ctl.step(step, measured, oat);

  Json out{{"plan", plan_result_to_json(res, table)},
           {"planner", planner_state_to_json(ctl.state())},
           {"manifest", make_manifest("control-step", doc, cfg.seed)}};
  if (out_path.empty())
    std::cout << out.dump(2) << '\n';
  else
    write_json_file(out_path, out);
  return 0;
}

int cmd_compare(const ConfigFlags &flags, const std::vector<std::string> &a_paths,
                const std::vector<std::string> &b_paths, const std::string &out_dir,
                std::optional<std::uint64_t> seed) {
  BootstrapOptions opts;
  std::optional<RunConfig> cfg;
  Json doc = Json::object();
  if (!flags.path.empty()) {
    doc = flags.document();
    cfg = run_config_from_json(doc, flags.base_dir());
    opts = cfg->bootstrap;
  }
  if (seed)
    opts.seed = *seed;
  if (flags.resamples)
    opts.resamples = *flags.resamples;
  if (flags.bandwidth)
    opts.bandwidth = *flags.bandwidth;

  const auto a = read_traces(a_paths);
  const auto b = read_traces(b_paths);
  const std::size_t zones = a.front().zones;
  for (const auto &t : b)
    if (t.zones != zones)
      throw ValidationError("trace sets A and B have different zone counts");
  std::vector<double> bands(zones, 1.0);
  if (cfg) {
    if (cfg->plant.zone_count() != zones)
      throw ValidationError("config zone count does not match the traces");
    bands.clear();
    for (const auto &v : cfg->vav_configs())
      bands.push_back(v.band);
  }
  auto hourly = [&](const std::vector<TraceSet> &days) {
    std::vector<HourlyRecord> out;
    for (std::size_t d = 0; d < days.size(); ++d) {
      auto recs = aggregate_hourly(days[d], bands, d);
      out.insert(out.end(), recs.begin(), recs.end());
    }
    return out;
  };
  const auto report = compare_controllers(hourly(a), hourly(b), opts);

  ensure_dir(out_dir);
  Json params{{"config", doc}, {"a", a_paths}, {"b", b_paths}, {"resamples", opts.resamples},
              {"bandwidth", opts.bandwidth}};
  Json out = report_to_json(report);
  out["manifest"] = make_manifest("compare", params, opts.seed);
  write_json_file((fs::path(out_dir) / "report.json").string(), out);
  write_curve_csv((fs::path(out_dir) / "energy_curve.csv").string(), report.energy);
  write_curve_csv((fs::path(out_dir) / "comfort_curve.csv").string(), report.comfort);

  std::cout << std::setprecision(4) << "energy  delta " << report.energy.delta << " kWh/day  p "
            << report.energy.p_value << "  CI [" << report.energy.ci_lo << ", "
            << report.energy.ci_hi << "]\n"
            << "comfort delta " << report.comfort.delta << " degF h/day  p "
            << report.comfort.p_value << "  CI [" << report.comfort.ci_lo << ", "
            << report.comfort.ci_hi << "]\n";
  return 0;
}

int cmd_pipeline(const ConfigFlags &flags, const std::string &out_dir) {
  const Json doc = flags.document();
  const RunConfig cfg = run_config_from_json(doc, flags.base_dir());
  const PipelineResult res = run_pipeline(cfg);
  ensure_dir(out_dir);
  const Json manifest = make_manifest("pipeline", doc, cfg.seed);

  TraceSet exp = res.experiment;
  exp.manifest = manifest.dump();
  write_trace_csv((fs::path(out_dir) / "experiment.csv").string(), exp);
  Json model = model_to_json(res.identification.model, res.identification.results);
  model["manifest"] = manifest;
  write_json_file((fs::path(out_dir) / "model.json").string(), model);
  auto dump_days = [&](std::vector<TraceSet> days, const char *name) {
    for (std::size_t d = 0; d < days.size(); ++d) {
      days[d].manifest = manifest.dump();
      write_trace_csv(day_file(out_dir, name, d), days[d]);
    }
  };
  dump_days(res.baseline, "default");
  dump_days(res.lbmpc, "lbmpc");
  Json report = report_to_json(res.report);
  report["manifest"] = manifest;
  write_json_file((fs::path(out_dir) / "report.json").string(), report);
  write_curve_csv((fs::path(out_dir) / "energy_curve.csv").string(), res.report.energy);
  write_curve_csv((fs::path(out_dir) / "comfort_curve.csv").string(), res.report.comfort);

  std::cout << std::setprecision(4) << "energy  delta " << res.report.energy.delta
            << " kWh/day  p " << res.report.energy.p_value << "\ncomfort delta "
            << res.report.comfort.delta << " degF h/day  p " << res.report.comfort.p_value
            << "\nruntime " << res.seconds << " s\n";
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Hybrid-mode learning-based MPC for building HVAC"};
  app.require_subcommand(1);

  auto *schedule = app.add_subcommand("schedule", "emit the SAT-cycling identification experiment");
  std::vector<double> sched_modes{52.0, 58.0, 62.0};
  int dwell = 120, start = 0;
  std::string date = "2024-07-01", sched_out;
  schedule->add_option("--modes", sched_modes, "SAT mode set, degF")->delimiter(',');
  schedule->add_option("--dwell", dwell, "minutes per mode");
  schedule->add_option("--start", start, "minutes after midnight");
  schedule->add_option("--date", date, "day of the experiment (YYYY-MM-DD)");
  schedule->add_option("-o,--out", sched_out, "output CSV (default stdout)");

  auto *identify = app.add_subcommand("identify", "identify the hybrid zone model from a trace");
  ConfigFlags id_flags;
  id_flags.add(identify, true);
  std::string id_trace, id_out = "model.json";
  identify->add_option("-t,--trace", id_trace, "experiment trace CSV")->required();
  identify->add_option("-o,--out", id_out, "model JSON");

  auto *simulate = app.add_subcommand("simulate", "simulate days of plant operation");
  ConfigFlags sim_flags;
  sim_flags.add(simulate, true);
  std::string controller = "default", sim_model, sim_out = "traces";
  std::size_t days = 1;
  simulate->add_option("--controller", controller, "default, lbmpc or experiment")
      ->check(CLI::IsMember({"default", "lbmpc", "experiment"}));
  simulate->add_option("--days", days, "number of days");
  simulate->add_option("-m,--model", sim_model, "identified model JSON (lbmpc)");
  simulate->add_option("-o,--out", sim_out, "output directory");

  auto *control = app.add_subcommand("control-step", "run one planning cycle from a state file");
  ConfigFlags ctl_flags;
  ctl_flags.add(control, true);
  std::string ctl_model, ctl_state, ctl_out;
  bool ctl_table = false;
  control->add_option("-m,--model", ctl_model, "identified model JSON")->required();
  control->add_option("-s,--state", ctl_state, "state JSON: step, measured, oat, planner")->required();
  control->add_option("-o,--out", ctl_out, "output JSON (default stdout)");
  control->add_flag("--table", ctl_table, "include the per-sequence cost table");

  auto *compare = app.add_subcommand("compare", "bootstrap comparison of two controllers");
  ConfigFlags cmp_flags;
  cmp_flags.add(compare, false);
  std::vector<std::string> cmp_a, cmp_b;
  std::string cmp_out = "compare";
  std::optional<std::uint64_t> cmp_seed;
  compare->add_option("-a", cmp_a, "trace CSVs of controller A (baseline)")->required();
  compare->add_option("-b", cmp_b, "trace CSVs of controller B")->required();
  compare->add_option("-o,--out", cmp_out, "output directory");
  compare->add_option("--bootstrap-seed", cmp_seed, "bootstrap seed");

  auto *pipeline = app.add_subcommand("pipeline", "experiment, identification, simulation and comparison");
  ConfigFlags pipe_flags;
  pipe_flags.add(pipeline, true);
  std::string pipe_out = "run";
  pipeline->add_option("-o,--out", pipe_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*schedule)
      return cmd_schedule(sched_modes, dwell, start, date, sched_out);
    if (*identify)
      return cmd_identify(id_flags, id_trace, id_out);
    if (*simulate)
      return cmd_simulate(sim_flags, controller, days, sim_model, sim_out);
    if (*control)
      return cmd_control_step(ctl_flags, ctl_model, ctl_state, ctl_out, ctl_table);
    if (*compare)
      return cmd_compare(cmp_flags, cmp_a, cmp_b, cmp_out, cmp_seed);
    if (*pipeline)
      return cmd_pipeline(pipe_flags, pipe_out);
  } catch (const ValidationError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Json::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError &e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
