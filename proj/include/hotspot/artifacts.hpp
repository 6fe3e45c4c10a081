#pragma once

#include <string>

#include "hotspot/data_model.hpp"
#include "hotspot/forecast.hpp"
#include "hotspot/inference.hpp"

namespace hotspot {

// JSON renderings used by the store. Doubles round-trip exactly; the output
// is a pure function of the value, so equal values give equal bytes.

std::string model_to_json(const FittedModel& model);
FittedModel model_from_json(const std::string& text);

std::string grid_to_json(const SpatialGrid& grid);
SpatialGrid grid_from_json(const std::string& text);

// Week, window, model id, the grid and per-cell log densities; classes and
// ranks are recomputed on load.
std::string forecast_to_json(const HotspotGrid& hotspots);
HotspotGrid forecast_from_json(const std::string& text);

}  // namespace hotspot
