#include "hotspot/expert.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <ostream>

#include "hotspot/csv.hpp"
#include "hotspot/errors.hpp"
#include "hotspot/geo.hpp"
#include "hotspot/rng.hpp"

namespace hotspot {

const char* to_string(IntelSource s) {
  switch (s) {
    case IntelSource::analyst:
      return "analyst";
    case IntelSource::simulated:
      return "simulated";
    case IntelSource::key_location:
      return "key-location";
  }
  return "analyst";
}

IntelSource intel_source_from_string(const std::string& s) {
  if (s.empty() || s == "analyst") return IntelSource::analyst;
  if (s == "simulated") return IntelSource::simulated;
  if (s == "key-location" || s == "key_location") return IntelSource::key_location;
  throw ArgumentError("unknown intel source '" + s + "'");
}

std::vector<EventRecord> intel_to_events(std::span<const IntelPoint> points) {
  std::vector<EventRecord> out;
  out.reserve(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& p = points[k];
    if (!p.window.valid()) throw ArgumentError("intel point " + std::to_string(k) + " has an invalid window");
    EventRecord e;
    e.event_id = "E" + std::to_string(k + 1);
    e.lon = p.lon;
    e.lat = p.lat;
    e.time_of_day = p.window.midpoint();
    out.push_back(std::move(e));
  }
  return out;
}

std::optional<TemporalBlock> build_expert_block(std::span<const IntelPoint> points) {
  if (points.empty()) return std::nullopt;
  TemporalBlock block;
  block.index = 0;
  block.is_expert = true;
  block.events = intel_to_events(points);
  return block;
}

SimulatedIntel simulate_expert_intel_traced(std::span<const EventRecord> actual_events,
                                            const IntelSimulation& sim,
                                            std::span<const TimeWindow> windows) {
  if (!(sim.radius_m >= 0.0)) throw ArgumentError("simulate_expert_intel: d must be non-negative");
  if (!(sim.proportion >= 0.0 && sim.proportion <= 1.0)) {
    throw ArgumentError("simulate_expert_intel: p must lie in [0, 1]");
  }
  SimulatedIntel out;
  for (std::size_t w = 0; w < windows.size(); ++w) {
    const TimeWindow& window = windows[w];
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < actual_events.size(); ++k) {
      if (window.contains(actual_events[k].time_of_day)) members.push_back(k);
    }
    const auto m = static_cast<std::size_t>(
        std::floor(static_cast<double>(members.size()) * sim.proportion + 1e-12));
    Rng rng = Rng::stream({sim.seed, 0x1A7E1ULL, w});
    // Partial Fisher-Yates: the first m slots become the sample.
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t span = members.size() - i;
      const std::size_t j = i + std::min(span - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(span)));
      std::swap(members[i], members[j]);
      const EventRecord& e = actual_events[members[i]];
      const double r_km = sim.radius_m / 1000.0 * std::sqrt(rng.uniform());
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      const LonLatScale scale = lonlat_scale(e.lat);
      IntelPoint p;
      p.lon = e.lon + r_km * std::cos(theta) / scale.km_per_deg_lon;
      p.lat = e.lat + r_km * std::sin(theta) / scale.km_per_deg_lat;
      p.window = window;
      p.source = IntelSource::simulated;
      out.points.push_back(p);
      out.source_event.push_back(members[i]);
    }
  }
  return out;
}

std::vector<IntelPoint> simulate_expert_intel(std::span<const EventRecord> actual_events,
                                              const IntelSimulation& sim,
                                              std::span<const TimeWindow> windows) {
  return simulate_expert_intel_traced(actual_events, sim, windows).points;
}

std::vector<IntelPoint> key_location_intel(std::span<const KeyLocation> locations,
                                           std::span<const TimeWindow> windows) {
  std::vector<IntelPoint> out;
  out.reserve(locations.size() * windows.size());
  for (const auto& loc : locations) {
    for (const auto& w : windows) {
      IntelPoint p;
      p.lon = loc.lon;
      p.lat = loc.lat;
      p.window = w;
      p.source = IntelSource::key_location;
      p.note = loc.type;
      out.push_back(std::move(p));
    }
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double require_number(const CsvReader& r, const std::string& column) {
  const auto v = parse_double(r.field(column));
  if (!v) throw SchemaError("line " + std::to_string(r.line()) + ": bad " + column);
  return *v;
}

}  // namespace

void write_intel_csv(std::ostream& out, std::span<const IntelPoint> points) {
  out << "lon,lat,window_start,window_end,source,note\n";
  for (const auto& p : points) {
    out << fmt(p.lon) << ',' << fmt(p.lat) << ',' << fmt(p.window.t1) << ',' << fmt(p.window.t2) << ','
        << to_string(p.source) << ',' << csv_escape(p.note) << '\n';
  }
}

std::vector<IntelPoint> read_intel_csv(std::istream& in) {
  CsvReader r(in);
  r.require({"lon", "lat", "window_start", "window_end"});
  std::vector<IntelPoint> out;
  while (r.next()) {
    IntelPoint p;
    p.lon = require_number(r, "lon");
    p.lat = require_number(r, "lat");
    p.window = {require_number(r, "window_start"), require_number(r, "window_end")};
    if (!p.window.valid()) throw SchemaError("line " + std::to_string(r.line()) + ": invalid window");
    if (r.has("source")) p.source = intel_source_from_string(r.field("source"));
    if (r.has("note")) p.note = r.field("note");
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<IntelPoint> read_intel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open intel file " + path);
  return read_intel_csv(in);
}

std::vector<KeyLocation> read_key_locations_csv(std::istream& in) {
  CsvReader r(in);
  r.require({"lon", "lat", "type"});
  std::vector<KeyLocation> out;
  while (r.next()) out.push_back({require_number(r, "lon"), require_number(r, "lat"), r.field("type")});
  return out;
}

std::vector<KeyLocation> read_key_locations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open key-locations file " + path);
  return read_key_locations_csv(in);
}

void write_key_locations_csv(std::ostream& out, std::span<const KeyLocation> locations) {
  out << "lon,lat,type\n";
  for (const auto& l : locations) out << fmt(l.lon) << ',' << fmt(l.lat) << ',' << csv_escape(l.type) << '\n';
}

}  // namespace hotspot
