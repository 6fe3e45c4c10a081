#include "hotspot/workspace.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "hotspot/artifacts.hpp"
#include "hotspot/digest.hpp"
#include "hotspot/errors.hpp"
#include "hotspot/geo.hpp"

namespace hotspot {
namespace {

using nlohmann::json;

BBox bounds_of(const std::vector<EventRecord>& events, double cell_m) {
  if (events.empty()) throw ArgumentError("dataset holds no events; give grid.bbox");
  BBox b{events[0].lon, events[0].lat, events[0].lon, events[0].lat};
  for (const auto& e : events) {
    b.lon_min = std::min(b.lon_min, e.lon);
    b.lat_min = std::min(b.lat_min, e.lat);
    b.lon_max = std::max(b.lon_max, e.lon);
    b.lat_max = std::max(b.lat_max, e.lat);
  }
  // A degenerate extent gets one cell of room.
  const LonLatScale s = lonlat_scale(0.5 * (b.lat_min + b.lat_max));
  const double dlon = cell_m / 1000.0 / s.km_per_deg_lon;
  const double dlat = cell_m / 1000.0 / s.km_per_deg_lat;
  if (b.lon_max - b.lon_min < dlon) b.lon_max = b.lon_min + dlon;
  if (b.lat_max - b.lat_min < dlat) b.lat_max = b.lat_min + dlat;
  return b;
}

StoreEntry require_kind(const std::optional<StoreEntry>& e, const std::string& id, const std::string& kind) {
  if (!e) throw NotFoundError("unknown artifact " + id);
  if (e->kind != kind) throw ArgumentError("artifact " + id + " is a " + e->kind + ", not a " + kind);
  return *e;
}

std::string meta_or(const StoreEntry& e, const std::string& key, const std::string& fallback = "") {
  const auto it = e.meta.find(key);
  return it == e.meta.end() ? fallback : it->second;
}

}  // namespace

std::vector<EventRecord> load_dataset(const ArtifactStore& store, const std::string& dataset_id) {
  require_kind(store.entry(dataset_id), dataset_id, "dataset");
  std::istringstream in(store.get(dataset_id));
  ParsedEvents parsed = parse_events_csv(in);
  if (parsed.rejected > 0) throw StoreError("dataset " + dataset_id + " holds unparseable rows");
  return std::move(parsed.events);
}

Workspace::Workspace(RunConfig config) : config_(std::move(config)), store_(resolve_store_root(config_.store)) {
  config_.validate();
  if (!config_.events_csv.empty()) {
    ParsedEvents parsed = parse_events_csv(config_.events_csv);
    const BBox keep = config_.grid.bbox ? *config_.grid.bbox : bounds_of(parsed.events, config_.grid.cell_m);
    CleanedEvents cleaned = clean_events(parsed.events, keep);
    events_ = std::move(cleaned.events);
    parsed.events.clear();
    ingest_report_ = std::move(parsed);

    std::ostringstream csv;
    write_events_csv(csv, events_);
    json ingest = {{"bbox", config_.grid.bbox ? json::array({keep.lon_min, keep.lat_min, keep.lon_max, keep.lat_max})
                                              : json(nullptr)}};
    std::map<std::string, std::string> meta{
        {"events", std::to_string(events_.size())},
        {"rejected", std::to_string(ingest_report_->rejected)},
        {"dropped", std::to_string(cleaned.report.input - cleaned.report.kept)},
        {"source", std::filesystem::path(config_.events_csv).filename().string()}};
    if (!events_.empty()) {
      auto [lo, hi] = std::minmax_element(events_.begin(), events_.end(),
                                          [](const EventRecord& a, const EventRecord& b) { return a.date < b.date; });
      meta["first"] = format_date(lo->date);
      meta["last"] = format_date(hi->date);
    }
    dataset_entry_ = store_.put("dataset", csv.str(), sha256_hex(ingest.dump()), meta);
    config_.dataset_id = dataset_entry_.id;
    config_.events_csv.clear();
  } else {
    events_ = load_dataset(store_, config_.dataset_id);
    dataset_entry_ = *store_.entry(config_.dataset_id);
  }

  config_hash_ = config_.hash();
  config_entry_ = store_.put("config", config_.to_json(false), config_hash_, {{"dataset", dataset_entry_.id}});

  std::optional<Polygon> mask;
  if (!config_.grid.mask_geojson.empty()) mask = Polygon::from_geojson_file(config_.grid.mask_geojson);
  const BBox box = config_.grid.bbox ? *config_.grid.bbox
                   : mask            ? mask->bounds()
                                     : bounds_of(events_, config_.grid.cell_m);
  grid_ = std::make_shared<SpatialGrid>(build_grid(box, config_.grid.cell_m, mask));
  if (grid_->cell_count() == 0) throw ArgumentError("grid has no cells inside the mask");
  grid_entry_ = store_.put("grid", grid_to_json(*grid_), config_hash_,
                           {{"cells", std::to_string(grid_->cell_count())}, {"config", config_entry_.id}});
}

std::unique_ptr<Workspace> Workspace::from_stored_config(const std::string& store_root, const std::string& config_id) {
  ArtifactStore store(store_root);
  require_kind(store.entry(config_id), config_id, "config");
  RunConfig c = RunConfig::from_json(store.get(config_id));
  c.store = store_root;
  return std::make_unique<Workspace>(std::move(c));
}

std::vector<Date> Workspace::weeks() const {
  std::set<Date> out;
  for (const auto& e : events_) out.insert(week_start_of(e.date));
  return {out.begin(), out.end()};
}

std::vector<EventRecord> Workspace::week_events(Date week_start) const {
  return events_between(events_, week_start, week_start + std::chrono::days{config_.block_length_days});
}

std::vector<EventRecord> Workspace::model_events(const std::optional<TimeWindow>& window) const {
  return window ? filter_time_window(events_, *window) : events_;
}

std::vector<Workspace::FitOutput> Workspace::fit(Date training_week, const std::optional<TimeWindow>& window,
                                                 const std::vector<IntelPoint>* intel) {
  const ModelSpec s = spec();
  if (s.bandwidth == BandwidthMode::srot_abramson) {
    throw ArgumentError("model 3 has no fit; forecast it from the data directly");
  }
  if (intel != nullptr && !s.accepts_expert) {
    throw ArgumentError("model " + std::to_string(s.id) + " does not take intel");
  }
  if (window && !window->valid()) throw ArgumentError("invalid window " + window->label());
  const int b = s.weights == WeightMode::single ? 1 : s.history_weeks;
  const std::chrono::days len{config_.block_length_days};

  std::vector<std::optional<TimeWindow>> targets;
  if (s.spatial_only) {
    if (window) {
      targets.push_back(*window);
    } else {
      for (const auto& w : config_.windows) targets.push_back(w);
    }
  } else {
    targets.push_back(std::nullopt);
  }

  std::string intel_id = "none";
  std::optional<TemporalBlock> expert;
  if (intel != nullptr) {
    intel_id = put_intel(*intel, {{"week", format_date(training_week)}}).id;
    expert = build_expert_block(*intel);
  }

  std::vector<FitOutput> out;
  for (const auto& w : targets) {
    BlockedDataset blocked = block_by_week(model_events(w), b, training_week, config_.block_length_days);
    blocked.expert = expert;
    const FittedModel model = hotspot::fit(blocked, config_.fit_config(!s.spatial_only));
    FitOutput o;
    o.model = store_.put("model", model_to_json(model), config_hash_,
                         {{"model", std::to_string(s.id)},
                          {"training_week", format_date(training_week)},
                          {"forecast_week", format_date(training_week + len)},
                          {"window", w ? w->label() : ""},
                          {"history_weeks", std::to_string(b)},
                          {"intel", intel_id},
                          {"dataset", dataset_entry_.id},
                          {"config", config_entry_.id}});
    std::ostringstream csv;
    write_param_summary_csv(csv, model);
    o.summary = store_.put("summary", csv.str(), config_hash_, {{"model_id", o.model.id}});
    out.push_back(std::move(o));
  }
  return out;
}

std::optional<StoreEntry> Workspace::find_model(Date forecast_week, const std::optional<TimeWindow>& window) const {
  const bool per_window = spec().spatial_only;
  if (per_window && !window) return std::nullopt;
  const std::string week = format_date(forecast_week);
  const std::string wlabel = per_window ? window->label() : "";
  const auto models = store_.list("model");
  for (auto it = models.rbegin(); it != models.rend(); ++it) {
    if (it->config_hash == config_hash_ && meta_or(*it, "forecast_week") == week &&
        meta_or(*it, "window") == wlabel && meta_or(*it, "intel") == "none") {
      return *it;
    }
  }
  return std::nullopt;
}

std::optional<StoreEntry> Workspace::find_forecast(Date forecast_week, const TimeWindow& window) const {
  const std::string week = format_date(forecast_week);
  const std::string model = std::to_string(spec().id);
  const auto forecasts = store_.list("forecast");
  for (auto it = forecasts.rbegin(); it != forecasts.rend(); ++it) {
    if (it->config_hash == config_hash_ && meta_or(*it, "week") == week && meta_or(*it, "window") == window.label() &&
        meta_or(*it, "model") == model && meta_or(*it, "intel") == "none") {
      return *it;
    }
  }
  return std::nullopt;
}

StoreEntry Workspace::forecast_from_model(const std::string& model_id, Date forecast_week, const TimeWindow& window,
                                          const std::vector<IntelPoint>* intel) {
  const StoreEntry entry = require_kind(store_.entry(model_id), model_id, "model");
  if (!window.valid()) throw ArgumentError("invalid window " + window.label());
  const std::string fitted_window = meta_or(entry, "window");
  if (!fitted_window.empty() && fitted_window != window.label()) {
    throw ArgumentError("model " + model_id + " was fitted for window " + fitted_window);
  }
  const FittedModel model = load_model(model_id);
  if (intel != nullptr && !model.has_expert() && meta_or(entry, "model") != "5") {
    throw ArgumentError("model " + meta_or(entry, "model") + " does not take intel");
  }
  const int b = std::stoi(meta_or(entry, "history_weeks", "1"));
  const std::optional<TimeWindow> subset = fitted_window.empty() ? std::nullopt : std::optional<TimeWindow>(window);
  BlockedDataset prediction = block_by_week(model_events(subset), b, forecast_week, config_.block_length_days);

  std::string intel_id = "none";
  if (intel != nullptr) {
    intel_id = put_intel(*intel, {{"week", format_date(forecast_week)}}).id;
    prediction.expert = build_expert_block(*intel);
  }

  ForecastOptions options;
  options.eval.fast_eval = config_.fast_eval;
  options.expert_weight = config_.intel.expert_weight;
  HotspotGrid h = config_.posterior_draws > 0
                      ? evaluate_grid_posterior(model, prediction, grid_, window, config_.posterior_draws, options)
                      : evaluate_grid(ForecastInput::from_model(model, prediction, options), grid_, window);
  h.week = format_date(forecast_week);
  h.window = window;
  h.model_id = std::stoi(meta_or(entry, "model", "0"));
  return store_.put("forecast", forecast_to_json(h), config_hash_,
                    {{"week", h.week},
                     {"window", window.label()},
                     {"model", std::to_string(h.model_id)},
                     {"model_id", model_id},
                     {"intel", intel_id},
                     {"dataset", dataset_entry_.id},
                     {"config", config_entry_.id}});
}

std::optional<StoreEntry> Workspace::forecast(Date forecast_week, const TimeWindow& window,
                                              const std::vector<IntelPoint>* intel) {
  if (!window.valid()) throw ArgumentError("invalid window " + window.label());
  const ModelSpec s = spec();
  if (intel == nullptr) {
    if (auto f = find_forecast(forecast_week, window)) return f;
  }
  if (s.bandwidth == BandwidthMode::srot_abramson) {
    if (intel != nullptr) throw ArgumentError("model 3 does not take intel");
    const BlockedDataset prediction =
        block_by_week(events_, s.history_weeks, forecast_week, config_.block_length_days);
    EvalOptions eval;
    eval.fast_eval = config_.fast_eval;
    HotspotGrid h = evaluate_grid(srot_abramson_input(prediction, !s.spatial_only, eval), grid_, window);
    h.week = format_date(forecast_week);
    h.window = window;
    h.model_id = s.id;
    return store_.put("forecast", forecast_to_json(h), config_hash_,
                      {{"week", h.week},
                       {"window", window.label()},
                       {"model", std::to_string(s.id)},
                       {"model_id", ""},
                       {"intel", "none"},
                       {"dataset", dataset_entry_.id},
                       {"config", config_entry_.id}});
  }
  const auto model = find_model(forecast_week, window);
  if (!model) return std::nullopt;
  return forecast_from_model(model->id, forecast_week, window, intel);
}

StoreEntry Workspace::put_intel(const std::vector<IntelPoint>& points, const std::map<std::string, std::string>& meta) {
  std::ostringstream csv;
  write_intel_csv(csv, points);
  auto m = meta;
  m["count"] = std::to_string(points.size());
  return store_.put("intel", csv.str(), config_hash_, m);
}

std::vector<IntelPoint> Workspace::load_intel(const std::string& intel_id) const {
  require_kind(store_.entry(intel_id), intel_id, "intel");
  std::istringstream in(store_.get(intel_id));
  return read_intel_csv(in);
}

FittedModel Workspace::load_model(const std::string& model_id) const {
  require_kind(store_.entry(model_id), model_id, "model");
  return model_from_json(store_.get(model_id));
}

HotspotGrid Workspace::load_forecast(const std::string& forecast_id) const {
  require_kind(store_.entry(forecast_id), forecast_id, "forecast");
  return forecast_from_json(store_.get(forecast_id));
}

Workspace::Evaluation Workspace::evaluate(const std::string& forecast_id) const {
  const HotspotGrid h = load_forecast(forecast_id);
  const auto week = parse_date(h.week);
  if (!week) throw SchemaError("forecast " + forecast_id + " has a malformed week");
  const auto actual = week_events(*week);
  Evaluation e;
  e.row = score_map(h, actual);
  e.curve = event_area_curve(h, actual, h.window);
  e.has_actuals = !e.curve.empty();
  return e;
}

void write_param_summary_csv(std::ostream& out, const FittedModel& model) {
  out << "param,mean,lower,upper\n";
  out.precision(17);
  for (const auto& s : summarize(model.adaptive.chains)) {
    out << s.name << ',' << s.mean << ',' << s.lower << ',' << s.upper << '\n';
  }
}

std::string diff_geojson(const HotspotGrid& a, const HotspotGrid& b) {
  const MapDiff d = diff_maps(a, b);
  json features = json::array();
  for (std::size_t c = 0; c < d.changes.size(); ++c) {
    const int id = static_cast<int>(c);
    const auto corners = a.grid->corners(id);
    json ring = json::array();
    for (const auto& p : corners) ring.push_back({p.lon, p.lat});
    ring.push_back({corners[0].lon, corners[0].lat});
    const CellChange ch = d.changes[c];
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}},
                        {"properties",
                         {{"cell_id", id},
                          {"change", to_string(ch)},
                          {"color", ch == CellChange::new_hot  ? json("blue")
                                    : ch == CellChange::cooled ? json("green")
                                                               : json(nullptr)},
                          {"class_a", to_string(a.classes[c])},
                          {"class_b", to_string(b.classes[c])}}}});
  }
  json fc = {{"type", "FeatureCollection"},
             {"features", features},
             {"summary",
              {{"blue", d.blue}, {"green", d.green}, {"blue_fraction", d.blue_fraction},
               {"green_fraction", d.green_fraction}}}};
  return fc.dump();
}

}  // namespace hotspot
