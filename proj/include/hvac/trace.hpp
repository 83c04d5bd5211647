#pragma once

#include "hvac/thermal.hpp"

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hvac {

using TimePoint = std::chrono::sys_time<std::chrono::minutes>;

/// "2024-07-01T00:15:00Z"
std::string format_timestamp(TimePoint t);
/// Accepts "YYYY-MM-DDTHH:MM[:SS][Z]"; seconds must be zero.
TimePoint parse_timestamp(const std::string &text);
/// Midnight UTC of an ISO date "YYYY-MM-DD".
TimePoint parse_date(const std::string &text);

/// One 15-minute sample of a building.
struct TraceRow {
  TimePoint time;
  double oat = 0.0;
  double sat = 0.0;
  int mode = 0; // 1-based mode index, 0 when the SAT is not a mode
  std::vector<ZoneState> zones;
  std::vector<double> setpoints;
  double energy_kwh = 0.0; // consumed over the step that starts at `time`
};

/// Time-stamped measurement records.
///
/// CSV schema, one header line plus one line per sample:
///   timestamp,T_o,SAT,mode,T_1,F_1,R_1,S_1,...,T_Z,F_Z,R_Z,S_Z,E_kWh
/// Lines starting with '#' carry metadata (the run manifest) and are skipped
/// on read. Timestamps are UTC, 15-minute aligned and strictly 15 minutes
/// apart.
struct TraceSet {
  std::size_t zones = 0;
  std::vector<TraceRow> rows;
  std::string manifest; // compact JSON, written as "# manifest: ..."

  void validate() const;
  double total_energy() const;
  std::vector<std::string> header() const;
};

void write_trace_csv(std::ostream &out, const TraceSet &trace);
void write_trace_csv(const std::string &path, const TraceSet &trace);
/// Throws ValidationError naming the offending line or column.
TraceSet read_trace_csv(std::istream &in);
TraceSet read_trace_csv(const std::string &path);

/// Per-zone series, sample 0 = row `first`.
std::vector<ZoneState> zone_series(const TraceSet &trace, std::size_t zone, std::size_t first = 0);

} // namespace hvac
