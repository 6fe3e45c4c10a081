#include "hotspot/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hotspot/digest.hpp"
#include "hotspot/errors.hpp"

namespace hotspot {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || base.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base) / p).lexically_normal().string();
}

ChainSchedule schedule_from(const json& j, const std::string& field) {
  if (!j.is_object()) throw ArgumentError(field + " must be an object");
  ChainSchedule s;
  s.warmup = j.value("warmup", s.warmup);
  s.samples = j.value("samples", s.samples);
  return s;
}

json schedule_json(const ChainSchedule& s) { return {{"warmup", s.warmup}, {"samples", s.samples}}; }

json config_json(const RunConfig& c, bool operational) {
  json j;
  j["events_csv"] = c.events_csv;
  j["dataset_id"] = c.dataset_id;
  json grid = {{"cell_m", c.grid.cell_m}, {"mask_geojson", c.grid.mask_geojson}};
  if (c.grid.bbox) grid["bbox"] = {c.grid.bbox->lon_min, c.grid.bbox->lat_min, c.grid.bbox->lon_max, c.grid.bbox->lat_max};
  j["grid"] = grid;
  j["week"] = c.week ? json(format_date(*c.week)) : json(nullptr);
  j["block_length_days"] = c.block_length_days;
  j["history_weeks"] = c.history_weeks;
  j["schedule"] = schedule_json(c.schedule);
  j["preliminary_schedule"] = c.preliminary_schedule ? schedule_json(*c.preliminary_schedule) : json(nullptr);
  j["chains"] = c.chains;
  j["seed"] = c.seed;
  j["model"] = c.model;
  j["fast_eval"] = c.fast_eval;
  j["prune_assignments"] = c.prune_assignments;
  j["posterior_draws"] = c.posterior_draws;
  j["intel"] = {{"proportion", c.intel.proportion},
                {"radius_m", c.intel.radius_m},
                {"seeds", c.intel.seeds},
                {"seed", c.intel.seed},
                {"expert_weight", c.intel.expert_weight ? json(*c.intel.expert_weight) : json(nullptr)},
                {"intel_csv", c.intel.intel_csv},
                {"key_locations_csv", c.intel.key_locations_csv}};
  json windows = json::array();
  for (const auto& w : c.windows) windows.push_back(w.label());
  j["windows"] = windows;
  if (operational) {
    j["store"] = c.store;
    j["threads"] = c.threads;
    j["fit_workers"] = c.fit_workers;
  }
  return j;
}

}  // namespace

void RunConfig::validate() const {
  if (events_csv.empty() == dataset_id.empty()) {
    throw ArgumentError("config: give exactly one of events_csv and dataset_id");
  }
  if (!events_csv.empty() && !fs::is_regular_file(events_csv)) {
    throw ArgumentError("config: events_csv '" + events_csv + "' does not exist");
  }
  for (const auto* p : {&grid.mask_geojson, &intel.intel_csv, &intel.key_locations_csv}) {
    if (!p->empty() && !fs::is_regular_file(*p)) throw ArgumentError("config: file '" + *p + "' does not exist");
  }
  if (!(grid.cell_m > 0.0)) throw ArgumentError("config: grid.cell_m must be positive");
  if (grid.bbox && !grid.bbox->valid()) throw ArgumentError("config: grid.bbox is degenerate");
  if (block_length_days < 1) throw ArgumentError("config: block_length_days must be positive");
  if (history_weeks < 1) throw ArgumentError("config: history_weeks must be positive");
  auto check = [](const ChainSchedule& s, const std::string& name) {
    if (s.warmup < 0 || s.samples < 1) throw ArgumentError("config: " + name + " must have warmup >= 0 and samples > 0");
  };
  check(schedule, "schedule");
  if (preliminary_schedule) check(*preliminary_schedule, "preliminary_schedule");
  if (chains < 1) throw ArgumentError("config: chains must be positive");
  if (model < 1 || model > 5) throw ArgumentError("config: model must be 1-5");
  if (!(intel.proportion >= 0.0 && intel.proportion <= 1.0)) throw ArgumentError("config: intel.proportion must lie in [0, 1]");
  if (!(intel.radius_m >= 0.0)) throw ArgumentError("config: intel.radius_m must be non-negative");
  if (intel.seeds < 1) throw ArgumentError("config: intel.seeds must be positive");
  if (intel.expert_weight && !(*intel.expert_weight >= 0.0 && *intel.expert_weight <= 1.0)) {
    throw ArgumentError("config: intel.expert_weight must lie in [0, 1]");
  }
  for (const auto& w : windows) {
    if (!w.valid()) throw ArgumentError("config: invalid window " + w.label());
  }
  if (fit_workers < 1) throw ArgumentError("config: fit_workers must be positive");
}

std::string RunConfig::to_json(bool operational) const { return config_json(*this, operational).dump(2); }

std::string RunConfig::hash() const { return sha256_hex(config_json(*this, false).dump()); }

FitConfig RunConfig::fit_config(bool has_time) const {
  FitConfig f;
  f.schedule = schedule;
  f.preliminary_schedule = preliminary_schedule;
  f.chains = chains;
  f.seed = seed;
  f.has_time = has_time;
  f.prune_assignments = prune_assignments;
  return f;
}

ModelRunConfig RunConfig::run_config() const {
  ModelRunConfig r;
  r.fit = fit_config(true);
  r.forecast.eval.fast_eval = fast_eval;
  r.forecast.expert_weight = intel.expert_weight;
  r.block_length_days = block_length_days;
  return r;
}

ModelSpec RunConfig::model_spec() const {
  ModelSpec s = ModelSpec::standard(model);
  if (s.weights != WeightMode::single) s.history_weeks = history_weeks;
  return s;
}

RunConfig RunConfig::from_json(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ArgumentError("config: top level must be an object");
  RunConfig c;
  try {
    c.events_csv = resolve(base_dir, j.value("events_csv", std::string()));
    c.dataset_id = j.value("dataset_id", std::string());
    if (j.contains("grid")) {
      const json& g = j["grid"];
      c.grid.cell_m = g.value("cell_m", c.grid.cell_m);
      c.grid.mask_geojson = resolve(base_dir, g.value("mask_geojson", std::string()));
      if (g.contains("bbox") && !g["bbox"].is_null()) {
        const auto b = g["bbox"].get<std::vector<double>>();
        if (b.size() != 4) throw ArgumentError("config: grid.bbox needs [lon_min, lat_min, lon_max, lat_max]");
        c.grid.bbox = BBox{b[0], b[1], b[2], b[3]};
      }
    }
    if (j.contains("week") && !j["week"].is_null()) {
      const auto d = parse_date(j["week"].get<std::string>());
      if (!d) throw ArgumentError("config: week must be YYYY-MM-DD");
      c.week = *d;
    }
    c.block_length_days = j.value("block_length_days", c.block_length_days);
    c.history_weeks = j.value("history_weeks", c.history_weeks);
    if (j.contains("schedule")) c.schedule = schedule_from(j["schedule"], "schedule");
    if (j.contains("preliminary_schedule") && !j["preliminary_schedule"].is_null()) {
      c.preliminary_schedule = schedule_from(j["preliminary_schedule"], "preliminary_schedule");
    }
    c.chains = j.value("chains", c.chains);
    c.seed = j.value("seed", c.seed);
    c.model = j.value("model", c.model);
    c.fast_eval = j.value("fast_eval", c.fast_eval);
    c.prune_assignments = j.value("prune_assignments", c.prune_assignments);
    c.posterior_draws = j.value("posterior_draws", c.posterior_draws);
    if (j.contains("intel")) {
      const json& i = j["intel"];
      c.intel.proportion = i.value("proportion", c.intel.proportion);
      c.intel.radius_m = i.value("radius_m", c.intel.radius_m);
      c.intel.seeds = i.value("seeds", c.intel.seeds);
      c.intel.seed = i.value("seed", c.intel.seed);
      if (i.contains("expert_weight") && !i["expert_weight"].is_null()) c.intel.expert_weight = i["expert_weight"].get<double>();
      c.intel.intel_csv = resolve(base_dir, i.value("intel_csv", std::string()));
      c.intel.key_locations_csv = resolve(base_dir, i.value("key_locations_csv", std::string()));
    }
    if (j.contains("windows")) {
      c.windows.clear();
      for (const auto& w : j["windows"]) c.windows.push_back(TimeWindow::parse(w.get<std::string>()));
    }
    c.store = resolve(base_dir, j.value("store", std::string()));
    c.threads = j.value("threads", c.threads);
    c.fit_workers = j.value("fit_workers", c.fit_workers);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("config: wrong field type: ") + e.what());
  }
  if (c.windows.empty()) throw ArgumentError("config: windows must not be empty");
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return from_json(text.str(), fs::path(path).parent_path().string());
}

std::string resolve_store_root(const std::string& configured) {
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv("HOTSPOT_STORE"); env != nullptr && *env != '\0') return env;
  return "hotspot-store";
}

}  // namespace hotspot
