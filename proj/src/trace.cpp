#include "hvac/trace.hpp"

#include "hvac/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace hvac {

using namespace std::chrono;

std::string format_timestamp(TimePoint t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const auto mins = (t - day).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:00Z", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(mins / 60), static_cast<int>(mins % 60));
  return buf;
}

namespace {

TimePoint make_time(int y, int mo, int d, int h, int mi) {
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59)
    throw ValidationError("invalid calendar date or time");
  return sys_days{ymd} + hours{h} + minutes{mi};
}

} // namespace

TimePoint parse_timestamp(const std::string &text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char tail[8] = {0};
  const int n = std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%7s", &y, &mo, &d, &h, &mi, &s, tail);
  if (n < 5)
    throw ValidationError("malformed ISO-8601 timestamp '" + text + "'");
  if (n >= 6 && s != 0)
    throw ValidationError("timestamp '" + text + "' has non-zero seconds");
  if (n == 7 && std::string(tail) != "Z")
    throw ValidationError("timestamp '" + text + "' must be UTC");
  return make_time(y, mo, d, h, mi);
}

TimePoint parse_date(const std::string &text) {
  int y = 0, mo = 0, d = 0;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d", &y, &mo, &d) != 3)
    throw ValidationError("malformed ISO date '" + text + "'");
  return make_time(y, mo, d, 0, 0);
}

std::vector<std::string> TraceSet::header() const {
  std::vector<std::string> h{"timestamp", "T_o", "SAT", "mode"};
  for (std::size_t j = 1; j <= zones; ++j)
    for (const char *p : {"T_", "F_", "R_", "S_"})
      h.push_back(p + std::to_string(j));
  h.push_back("E_kWh");
  return h;
}

void TraceSet::validate() const {
  if (zones == 0)
    throw ValidationError("trace must describe at least one zone");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto &r = rows[i];
    const auto fail = [i](const std::string &msg) {
      throw ValidationError("trace row " + std::to_string(i + 1) + ": " + msg);
    };
    if (r.zones.size() != zones || r.setpoints.size() != zones)
      fail("zone count does not match the trace");
    if (r.time.time_since_epoch().count() % kSampleMinutes != 0)
      fail("timestamp is not aligned to 15 minutes");
    if (i > 0) {
      const auto gap = (r.time - rows[i - 1].time).count();
      if (gap <= 0)
        fail("timestamps must be strictly increasing");
      if (gap != kSampleMinutes)
        fail("samples must be exactly 15 minutes apart (gap of " + std::to_string(gap) +
             " minutes)");
    }
    if (!std::isfinite(r.oat) || !std::isfinite(r.sat) || !std::isfinite(r.energy_kwh))
      fail("non-finite value");
    for (std::size_t j = 0; j < zones; ++j)
      if (!std::isfinite(r.zones[j].temp) || !std::isfinite(r.zones[j].flow) ||
          !std::isfinite(r.zones[j].reheat) || !std::isfinite(r.setpoints[j]))
        fail("non-finite zone value");
  }
}

double TraceSet::total_energy() const {
  double e = 0.0;
  for (const auto &r : rows)
    e += r.energy_kwh;
  return e;
}

void write_trace_csv(std::ostream &out, const TraceSet &trace) {
  trace.validate();
  if (!trace.manifest.empty())
    out << "# manifest: " << trace.manifest << '\n';
  const auto head = trace.header();
  for (std::size_t i = 0; i < head.size(); ++i)
    out << (i ? "," : "") << head[i];
  out << '\n';
  // 17 significant digits round-trip every double exactly.
  out << std::setprecision(17);
  for (const auto &r : trace.rows) {
    out << format_timestamp(r.time) << ',' << r.oat << ',' << r.sat << ',' << r.mode;
    for (std::size_t j = 0; j < trace.zones; ++j)
      out << ',' << r.zones[j].temp << ',' << r.zones[j].flow << ',' << r.zones[j].reheat << ','
          << r.setpoints[j];
    out << ',' << r.energy_kwh << '\n';
  }
}

void write_trace_csv(const std::string &path, const TraceSet &trace) {
  std::ofstream out(path);
  if (!out)
    throw ValidationError("cannot open '" + path + "' for writing");
  write_trace_csv(out, trace);
}

namespace {

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ','))
    out.push_back(cell);
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

double parse_number(const std::string &cell, std::size_t line, const std::string &column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != cell.size())
    throw ValidationError("line " + std::to_string(line) + ", column '" + column +
                          "': not a number ('" + cell + "')");
  return v;
}

} // namespace

TraceSet read_trace_csv(std::istream &in) {
  TraceSet trace;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> head;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    if (line[0] == '#') {
      const std::string tag = "# manifest: ";
      if (line.rfind(tag, 0) == 0)
        trace.manifest = line.substr(tag.size());
      continue;
    }
    if (head.empty()) {
      head = split_csv(line);
      // Zone count from the highest zone suffix seen in any per-zone column.
      for (const auto &h : head) {
        if (h.size() > 2 && h[1] == '_' && std::string("TFRS").find(h[0]) != std::string::npos) {
          try {
            trace.zones = std::max<std::size_t>(trace.zones, std::stoul(h.substr(2)));
          } catch (const std::exception &) {
          }
        }
      }
      if (trace.zones == 0)
        throw ValidationError("trace header names no zone columns");
      const auto expect = trace.header();
      for (const auto &name : expect) {
        bool found = false;
        for (const auto &h : head)
          found = found || h == name;
        if (!found)
          throw ValidationError("trace header is missing column '" + name + "'");
      }
      if (head.size() != expect.size())
        throw ValidationError("trace header has " + std::to_string(head.size()) +
                              " columns; expected " + std::to_string(expect.size()));
      for (std::size_t i = 0; i < expect.size(); ++i)
        if (head[i] != expect[i])
          throw ValidationError("trace column " + std::to_string(i + 1) + " should be '" +
                                expect[i] + "' but is '" + head[i] + "'");
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != head.size())
      throw ValidationError("line " + std::to_string(lineno) + ": expected " +
                            std::to_string(head.size()) + " columns, found " +
                            std::to_string(cells.size()));
    TraceRow r;
    try {
      r.time = parse_timestamp(cells[0]);
    } catch (const ValidationError &e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
    r.oat = parse_number(cells[1], lineno, head[1]);
    r.sat = parse_number(cells[2], lineno, head[2]);
    r.mode = static_cast<int>(parse_number(cells[3], lineno, head[3]));
    r.zones.resize(trace.zones);
    r.setpoints.resize(trace.zones);
    for (std::size_t j = 0; j < trace.zones; ++j) {
      const std::size_t c = 4 + 4 * j;
      r.zones[j].temp = parse_number(cells[c], lineno, head[c]);
      r.zones[j].flow = parse_number(cells[c + 1], lineno, head[c + 1]);
      r.zones[j].reheat = parse_number(cells[c + 2], lineno, head[c + 2]);
      r.setpoints[j] = parse_number(cells[c + 3], lineno, head[c + 3]);
    }
    r.energy_kwh = parse_number(cells.back(), lineno, head.back());
    if (!trace.rows.empty()) {
      const auto gap = (r.time - trace.rows.back().time).count();
      if (gap != kSampleMinutes)
        throw ValidationError("line " + std::to_string(lineno) +
                              ": samples must be exactly 15 minutes apart (gap of " +
                              std::to_string(gap) + " minutes)");
    }
    trace.rows.push_back(std::move(r));
  }
  if (head.empty())
    throw ValidationError("trace has no header line");
  trace.validate();
  return trace;
}

TraceSet read_trace_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open trace '" + path + "'");
  return read_trace_csv(in);
}

std::vector<ZoneState> zone_series(const TraceSet &trace, std::size_t zone, std::size_t first) {
  if (zone >= trace.zones)
    throw ValidationError("zone index out of range for trace");
  std::vector<ZoneState> out;
  for (std::size_t i = first; i < trace.rows.size(); ++i)
    out.push_back(trace.rows[i].zones[zone]);
  return out;
}

} // namespace hvac
