#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hotspot/data_model.hpp"

namespace hotspot {

enum class IntelSource { analyst, simulated, key_location };

const char* to_string(IntelSource s);
IntelSource intel_source_from_string(const std::string& s);

struct IntelPoint {
  double lon = 0.0;
  double lat = 0.0;
  TimeWindow window;
  IntelSource source = IntelSource::analyst;
  std::string note;

  friend bool operator==(const IntelPoint&, const IntelPoint&) = default;
};

// Pseudo-events at the window mid-points. Empty input gives no block.
std::optional<TemporalBlock> build_expert_block(std::span<const IntelPoint> points);
std::vector<EventRecord> intel_to_events(std::span<const IntelPoint> points);

struct IntelSimulation {
  double proportion = 0.5;  // p
  double radius_m = 100.0;  // d
  std::uint64_t seed = 1;
};

// For each window: m = floor(n p) of the window's events drawn without
// replacement, each moved to a uniform point of the radius-d disc around it.
std::vector<IntelPoint> simulate_expert_intel(std::span<const EventRecord> actual_events,
                                              const IntelSimulation& sim,
                                              std::span<const TimeWindow> windows);

// Index of the source event for each simulated point (same order), for tests.
struct SimulatedIntel {
  std::vector<IntelPoint> points;
  std::vector<std::size_t> source_event;
};
SimulatedIntel simulate_expert_intel_traced(std::span<const EventRecord> actual_events,
                                            const IntelSimulation& sim,
                                            std::span<const TimeWindow> windows);

struct KeyLocation {
  double lon = 0.0;
  double lat = 0.0;
  std::string type;
};

// One point per location and window.
std::vector<IntelPoint> key_location_intel(std::span<const KeyLocation> locations,
                                           std::span<const TimeWindow> windows);

// lon,lat,window_start,window_end,source,note
void write_intel_csv(std::ostream& out, std::span<const IntelPoint> points);
std::vector<IntelPoint> read_intel_csv(std::istream& in);
std::vector<IntelPoint> read_intel_csv(const std::string& path);

// lon,lat,type
std::vector<KeyLocation> read_key_locations_csv(std::istream& in);
std::vector<KeyLocation> read_key_locations_csv(const std::string& path);
void write_key_locations_csv(std::ostream& out, std::span<const KeyLocation> locations);

}  // namespace hotspot
