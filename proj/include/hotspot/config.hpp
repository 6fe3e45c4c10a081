#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hotspot/data_model.hpp"
#include "hotspot/evaluation.hpp"
#include "hotspot/forecast.hpp"
#include "hotspot/inference.hpp"

namespace hotspot {

struct GridConfig {
  std::optional<BBox> bbox;  // default: bounds of the events
  double cell_m = 200.0;
  std::string mask_geojson;  // optional boundary polygon
};

struct IntelConfig {
  double proportion = 0.5;
  double radius_m = 100.0;
  int seeds = 10;
  std::uint64_t seed = 1;
  std::optional<double> expert_weight;
  std::string intel_csv;
  std::string key_locations_csv;
};

// JSON run configuration. Relative paths resolve against the file's directory.
struct RunConfig {
  std::string events_csv;  // either this ...
  std::string dataset_id;  // ... or a stored dataset
  GridConfig grid;
  std::optional<Date> week;  // training week anchor
  int block_length_days = 7;
  int history_weeks = 52;
  ChainSchedule schedule{100, 100};
  std::optional<ChainSchedule> preliminary_schedule;
  int chains = 1;
  std::uint64_t seed = 1;
  int model = 5;
  bool fast_eval = false;
  bool prune_assignments = false;
  std::size_t posterior_draws = 0;  // 0: forecast at the posterior mean
  IntelConfig intel;
  std::vector<TimeWindow> windows{canonical_windows().begin(), canonical_windows().end()};
  std::string store;                // store root; env HOTSPOT_STORE otherwise
  int threads = 0;                  // 0: library default
  int fit_workers = 1;

  // Throws ArgumentError naming the offending field.
  void validate() const;
  // Without the operational fields when `operational` is false.
  std::string to_json(bool operational = true) const;
  // SHA-256 of the canonical JSON minus operational fields (store, threads,
  // fit_workers).
  std::string hash() const;

  FitConfig fit_config(bool has_time = true) const;
  ModelRunConfig run_config() const;
  ModelSpec model_spec() const;

  static RunConfig from_json(const std::string& text, const std::string& base_dir = "");
  static RunConfig load(const std::string& path);
};

// Store root: explicit value, else $HOTSPOT_STORE, else "./hotspot-store".
std::string resolve_store_root(const std::string& configured);

}  // namespace hotspot
