#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hotspot/config.hpp"
#include "hotspot/evaluation.hpp"
#include "hotspot/expert.hpp"
#include "hotspot/forecast.hpp"
#include "hotspot/store.hpp"

namespace hotspot {

// A run configuration bound to a store: the dataset, the grid and the
// fit/forecast/evaluate steps shared by the CLI and the service. Results are
// written to the store; methods are safe to call from several threads.
class Workspace {
 public:
  // Ingests `config.events_csv` (or loads `config.dataset_id`) and records
  // the resolved configuration. The config hash is taken after the events
  // path has been replaced by the dataset id.
  explicit Workspace(RunConfig config);
  // Workspace for the configuration stored under `config_id`.
  static std::unique_ptr<Workspace> from_stored_config(const std::string& store_root, const std::string& config_id);

  const RunConfig& config() const { return config_; }
  const std::string& config_hash() const { return config_hash_; }
  const StoreEntry& config_entry() const { return config_entry_; }
  const StoreEntry& dataset_entry() const { return dataset_entry_; }
  const StoreEntry& grid_entry() const { return grid_entry_; }
  const ParsedEvents* ingest_report() const { return ingest_report_ ? &*ingest_report_ : nullptr; }
  ArtifactStore& store() { return store_; }
  const ArtifactStore& store() const { return store_; }

  const std::vector<EventRecord>& events() const { return events_; }
  std::shared_ptr<const SpatialGrid> grid() const { return grid_; }
  ModelSpec spec() const { return config_.model_spec(); }
  // Week starts (Sundays) that hold events, ascending.
  std::vector<Date> weeks() const;
  std::vector<EventRecord> week_events(Date week_start) const;

  struct FitOutput {
    StoreEntry model;
    StoreEntry summary;  // posterior summary CSV
  };
  // Fits the configured model on the block starting at `training_week`.
  // Spatial-only models are fitted per window: all configured windows, or
  // just `window`. Model 3 has nothing to fit (ArgumentError). Intel, if
  // given, enters the fit as the expert block.
  std::vector<FitOutput> fit(Date training_week, const std::optional<TimeWindow>& window = std::nullopt,
                             const std::vector<IntelPoint>* intel = nullptr);

  // Stored model fitted under this configuration for `forecast_week`.
  std::optional<StoreEntry> find_model(Date forecast_week, const std::optional<TimeWindow>& window) const;
  // Stored no-intel forecast under this configuration.
  std::optional<StoreEntry> find_forecast(Date forecast_week, const TimeWindow& window) const;

  // Forecast from a stored model. Intel points, if given, form the expert
  // block of the forecast week.
  StoreEntry forecast_from_model(const std::string& model_id, Date forecast_week, const TimeWindow& window,
                                 const std::vector<IntelPoint>* intel = nullptr);
  // Forecast for the configured model, from a stored model for the week or
  // (Model 3) straight from the data. nullopt when a fit is needed first.
  std::optional<StoreEntry> forecast(Date forecast_week, const TimeWindow& window,
                                     const std::vector<IntelPoint>* intel = nullptr);

  StoreEntry put_intel(const std::vector<IntelPoint>& points, const std::map<std::string, std::string>& meta = {});
  std::vector<IntelPoint> load_intel(const std::string& intel_id) const;
  FittedModel load_model(const std::string& model_id) const;
  HotspotGrid load_forecast(const std::string& forecast_id) const;

  struct Evaluation {
    MetricRow row;
    EventAreaCurve curve;
    bool has_actuals = false;
  };
  // Scores a stored forecast against the events of its week.
  Evaluation evaluate(const std::string& forecast_id) const;

 private:
  std::vector<EventRecord> model_events(const std::optional<TimeWindow>& window) const;

  RunConfig config_;
  ArtifactStore store_;
  std::optional<ParsedEvents> ingest_report_;
  std::vector<EventRecord> events_;
  std::shared_ptr<const SpatialGrid> grid_;
  std::string config_hash_;
  StoreEntry dataset_entry_;
  StoreEntry config_entry_;
  StoreEntry grid_entry_;
};

// chain-pooled posterior summaries: param,mean,lower,upper
void write_param_summary_csv(std::ostream& out, const FittedModel& model);

// FeatureCollection over the cells of `a` with properties
// {cell_id, change, color, class_a, class_b}; blue marks cells that turn hot
// (red or yellow) in `b`, green cells that stop being hot.
std::string diff_geojson(const HotspotGrid& a, const HotspotGrid& b);

// Events of a stored dataset.
std::vector<EventRecord> load_dataset(const ArtifactStore& store, const std::string& dataset_id);

}  // namespace hotspot
