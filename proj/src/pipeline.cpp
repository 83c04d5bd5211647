#include "hvac/pipeline.hpp"

#include "hvac/errors.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <sstream>

namespace hvac {

namespace {

std::uint64_t stream_seed(std::uint64_t seed, ControllerKind kind) {
  return derive_seed(seed, 0x100 + static_cast<std::uint64_t>(kind));
}

} // namespace

const char *controller_name(ControllerKind kind) {
  switch (kind) {
  case ControllerKind::Baseline:
    return "default";
  case ControllerKind::Lbmpc:
    return "lbmpc";
  case ControllerKind::Experiment:
    return "experiment";
  }
  return "?";
}

std::vector<TraceSet> simulate_days(const RunConfig &cfg, ControllerKind kind, std::size_t days,
                                    std::uint64_t seed, const HybridModel *model,
                                    std::size_t day_offset) {
  cfg.validate();
  if (kind == ControllerKind::Lbmpc) {
    if (model == nullptr)
      throw ValidationError("LBMPC simulation needs an identified model");
    model->validate();
    if (model->zone_count() != cfg.plant.zone_count())
      throw ValidationError("model and plant zone counts differ");
  }
  const std::uint64_t stream = stream_seed(seed, kind);
  const auto vav = cfg.vav_configs();
  const auto weights = cfg.resolved_weights();
  const auto schedule = cfg.schedule();
  const double base_sat = cfg.resolved_baseline_sat();
  const double after_sat = cfg.experiment.after_sat.value_or(base_sat);

  auto run_day = [&](std::size_t d) {
    DayOptions opts;
    opts.start = cfg.start() + std::chrono::days{static_cast<long>(day_offset + d)};
    opts.mode_sats = cfg.mode_sats;
    const std::uint64_t s = derive_seed(stream, d);
    switch (kind) {
    case ControllerKind::Baseline:
      return default_controller(cfg.plant, base_sat, s, opts);
    case ControllerKind::Experiment:
      return experiment_controller(cfg.plant, schedule, after_sat, s, opts);
    case ControllerKind::Lbmpc:
      break;
    }
    return lbmpc_controller(cfg.plant, *model, vav, weights, s, opts, cfg.horizon, cfg.plan).trace;
  };

  std::vector<std::future<TraceSet>> jobs;
  jobs.reserve(days);
  for (std::size_t d = 0; d < days; ++d)
    jobs.push_back(std::async(std::launch::async, run_day, d));
  std::vector<TraceSet> out;
  out.reserve(days);
  for (auto &j : jobs)
    out.push_back(j.get());
  return out;
}

Identification identify_from_trace(const RunConfig &cfg, const TraceSet &trace) {
  trace.validate();
  if (trace.zones != cfg.plant.zone_count())
    throw ValidationError("trace zone count does not match the configuration");
  if (trace.rows.empty())
    throw ValidationError("trace is empty");
  const auto schedule = cfg.schedule();
  const auto start_minute = schedule.blocks.front().start;

  using namespace std::chrono;
  std::size_t first = trace.rows.size();
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const auto t = trace.rows[i].time;
    if (t - floor<days>(t) == start_minute) {
      first = i;
      break;
    }
  }
  const std::size_t total = schedule.total_samples();
  if (first == trace.rows.size() || first + total >= trace.rows.size()) {
    std::ostringstream oss;
    oss << "trace does not cover the experiment schedule (" << total + 1
        << " samples starting at minute " << start_minute.count() << " of the day)";
    throw ValidationError(oss.str());
  }
  for (const auto &b : schedule.blocks) {
    const std::size_t off = b.first_sample - schedule.blocks.front().first_sample;
    for (std::size_t k = 0; k < b.samples; ++k) {
      const auto &row = trace.rows[first + off + k];
      if (std::abs(row.sat - b.sat) > 1e-9) {
        std::ostringstream oss;
        oss << "trace SAT " << row.sat << " at " << format_timestamp(row.time)
            << " does not match the experiment schedule (" << b.sat << ")";
        throw ValidationError(oss.str());
      }
    }
  }

  const auto windows = schedule.windows();
  const Prior prior = cfg.resolved_prior();
  std::vector<IdProblem> problems;
  for (std::size_t j = 0; j < trace.zones; ++j)
    problems.push_back(
        make_id_problem(cfg.mode_sats, prior, zone_series(trace, j, first), windows, cfg.constraints()));

  Identification id;
  id.first_row = first;
  id.results = identify_zones(problems);
  id.model.modes = make_modes(cfg.mode_sats);
  for (const auto &r : id.results) {
    id.model.zones.push_back(r.coeffs);
    id.model.q.push_back(r.q);
  }
  id.model.validate();
  return id;
}

std::vector<HourlyRecord> hourly_records(const RunConfig &cfg, std::span<const TraceSet> days) {
  std::vector<double> bands;
  for (const auto &v : cfg.vav_configs())
    bands.push_back(v.band);
  std::vector<HourlyRecord> out;
  for (std::size_t d = 0; d < days.size(); ++d) {
    auto recs = aggregate_hourly(days[d], bands, d);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

PipelineResult run_pipeline(const RunConfig &cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  PipelineResult res;
  res.experiment = simulate_days(cfg, ControllerKind::Experiment, 1, cfg.seed).front();
  res.identification = identify_from_trace(cfg, res.experiment);
  res.baseline = simulate_days(cfg, ControllerKind::Baseline, cfg.days.baseline, cfg.seed, nullptr, 1);
  res.lbmpc = simulate_days(cfg, ControllerKind::Lbmpc, cfg.days.lbmpc, cfg.seed,
                            &res.identification.model, 1 + cfg.days.baseline);
  const auto a = hourly_records(cfg, res.baseline);
  const auto b = hourly_records(cfg, res.lbmpc);
  res.report = compare_controllers(a, b, cfg.bootstrap);
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

} // namespace hvac
