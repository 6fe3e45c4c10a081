#include "hotspot/artifacts.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

#include "hotspot/errors.hpp"

namespace hotspot {
namespace {

using nlohmann::json;

json params_json(const ModelParams& p) {
  return {{"alpha1", p.alpha1}, {"beta1", p.beta1}, {"alpha2", p.alpha2}, {"beta2", p.beta2}, {"alpha3", p.alpha3},
          {"beta3", p.beta3},   {"has_time", p.has_time}, {"weights", p.weights}};
}

ModelParams params_from(const json& j) {
  ModelParams p;
  p.alpha1 = j.at("alpha1").get<double>();
  p.beta1 = j.at("beta1").get<double>();
  p.alpha2 = j.at("alpha2").get<double>();
  p.beta2 = j.at("beta2").get<double>();
  p.alpha3 = j.at("alpha3").get<double>();
  p.beta3 = j.at("beta3").get<double>();
  p.has_time = j.at("has_time").get<bool>();
  p.weights = j.at("weights").get<std::vector<double>>();
  return p;
}

json points_json(const MixturePoints& m) {
  return {{"lon", m.lon},
          {"lat", m.lat},
          {"hours", m.hours},
          {"slot", m.slot},
          {"slot_size", m.slot_size},
          {"slot_lag", m.slot_lag},
          {"dropped_lags", m.dropped_lags},
          {"has_expert", m.has_expert}};
}

MixturePoints points_from(const json& j) {
  MixturePoints m;
  m.lon = j.at("lon").get<std::vector<double>>();
  m.lat = j.at("lat").get<std::vector<double>>();
  m.hours = j.at("hours").get<std::vector<double>>();
  m.slot = j.at("slot").get<std::vector<int>>();
  m.slot_size = j.at("slot_size").get<std::vector<std::size_t>>();
  m.slot_lag = j.at("slot_lag").get<std::vector<int>>();
  m.dropped_lags = j.at("dropped_lags").get<std::vector<int>>();
  m.has_expert = j.at("has_expert").get<bool>();
  if (m.lat.size() != m.lon.size() || m.hours.size() != m.lon.size() || m.slot.size() != m.lon.size() ||
      m.slot_lag.size() != m.slot_size.size()) {
    throw SchemaError("model artifact: mixture point arrays differ in length");
  }
  return m;
}

json draws_json(const std::vector<ModelParams>& draws) {
  json a = json::array();
  for (const auto& d : draws) a.push_back(params_json(d));
  return a;
}

std::vector<ModelParams> draws_from(const json& j) {
  std::vector<ModelParams> out;
  for (const auto& d : j) out.push_back(params_from(d));
  return out;
}

json stage_json(const StageFit& s) {
  json chains = json::array();
  for (const auto& c : s.chains) {
    chains.push_back({{"chain", c.chain},
                      {"warmup", c.warmup},
                      {"draws", draws_json(c.draws)},
                      {"log_likelihood", c.log_likelihood},
                      {"warmup_draws", draws_json(c.warmup_draws)}});
  }
  return {{"chains", chains}, {"mean", params_json(s.mean)}};
}

StageFit stage_from(const json& j) {
  StageFit s;
  for (const auto& c : j.at("chains")) {
    PosteriorSamples p;
    p.chain = c.at("chain").get<int>();
    p.warmup = c.at("warmup").get<int>();
    p.draws = draws_from(c.at("draws"));
    p.log_likelihood = c.at("log_likelihood").get<std::vector<double>>();
    p.warmup_draws = draws_from(c.at("warmup_draws"));
    s.chains.push_back(std::move(p));
  }
  s.mean = params_from(j.at("mean"));
  return s;
}

json schedule_json(const ChainSchedule& s) { return {{"warmup", s.warmup}, {"samples", s.samples}}; }

ChainSchedule schedule_from(const json& j) { return {j.at("warmup").get<int>(), j.at("samples").get<int>()}; }

json grid_value(const SpatialGrid& g) {
  std::string mask(g.mask().size(), '0');
  for (std::size_t k = 0; k < mask.size(); ++k) mask[k] = g.mask()[k] ? '1' : '0';
  return {{"origin_lon", g.origin_lon()}, {"origin_lat", g.origin_lat()}, {"cell_lon", g.cell_lon()},
          {"cell_lat", g.cell_lat()},     {"n_cols", g.n_cols()},         {"n_rows", g.n_rows()},
          {"mask", mask}};
}

SpatialGrid grid_from_value(const json& j) {
  const std::string mask = j.at("mask").get<std::string>();
  std::vector<unsigned char> m(mask.size());
  for (std::size_t k = 0; k < mask.size(); ++k) m[k] = mask[k] == '1' ? 1 : 0;
  return SpatialGrid(j.at("origin_lon").get<double>(), j.at("origin_lat").get<double>(), j.at("cell_lon").get<double>(),
                     j.at("cell_lat").get<double>(), j.at("n_cols").get<int>(), j.at("n_rows").get<int>(), std::move(m));
}

template <typename F>
auto parse_as(const std::string& text, const char* what, F&& body) {
  try {
    return body(json::parse(text));
  } catch (const json::exception& e) {
    throw SchemaError(std::string(what) + " artifact is malformed: " + e.what());
  }
}

}  // namespace

std::string model_to_json(const FittedModel& m) {
  const FitConfig& c = m.config;
  json config = {{"schedule", schedule_json(c.schedule)},
                 {"preliminary_schedule", c.preliminary_schedule ? schedule_json(*c.preliminary_schedule) : json(nullptr)},
                 {"chains", c.chains},
                 {"seed", c.seed},
                 {"has_time", c.has_time},
                 {"prune_assignments", c.prune_assignments},
                 {"grids", {{"beta", c.grids.beta}, {"alpha3", c.grids.alpha3}}}};
  json j = {{"kind", "fitted-model"},
            {"config", config},
            {"pilot_points", points_json(m.pilot_points)},
            {"preliminary", stage_json(m.preliminary)},
            {"fit_points", points_json(m.fit_points)},
            {"scales", {{"A", m.scales.A}, {"G", m.scales.G}}},
            {"adaptive", stage_json(m.adaptive)},
            {"training_count", m.training_count},
            {"data_digest", m.data_digest}};
  return j.dump();
}

FittedModel model_from_json(const std::string& text) {
  return parse_as(text, "model", [](const json& j) {
    if (j.value("kind", std::string()) != "fitted-model") throw SchemaError("not a fitted-model artifact");
    FittedModel m;
    const json& c = j.at("config");
    m.config.schedule = schedule_from(c.at("schedule"));
    if (!c.at("preliminary_schedule").is_null()) m.config.preliminary_schedule = schedule_from(c.at("preliminary_schedule"));
    m.config.chains = c.at("chains").get<int>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.has_time = c.at("has_time").get<bool>();
    m.config.prune_assignments = c.at("prune_assignments").get<bool>();
    m.config.grids.beta = c.at("grids").at("beta").get<std::vector<double>>();
    m.config.grids.alpha3 = c.at("grids").at("alpha3").get<std::vector<double>>();
    m.pilot_points = points_from(j.at("pilot_points"));
    m.preliminary = stage_from(j.at("preliminary"));
    m.fit_points = points_from(j.at("fit_points"));
    m.scales.A = j.at("scales").at("A").get<std::vector<double>>();
    m.scales.G = j.at("scales").at("G").get<double>();
    m.adaptive = stage_from(j.at("adaptive"));
    m.training_count = j.at("training_count").get<std::size_t>();
    m.data_digest = j.at("data_digest").get<std::string>();
    return m;
  });
}

std::string grid_to_json(const SpatialGrid& grid) { return grid_value(grid).dump(); }

SpatialGrid grid_from_json(const std::string& text) {
  return parse_as(text, "grid", [](const json& j) { return grid_from_value(j); });
}

std::string forecast_to_json(const HotspotGrid& h) {
  if (!h.grid) throw ArgumentError("forecast_to_json: map has no grid");
  json ld = json::array();
  for (double v : h.log_density) ld.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  json j = {{"kind", "forecast"},
            {"week", h.week},
            {"window", h.window.label()},
            {"model_id", h.model_id},
            {"grid", grid_value(*h.grid)},
            {"log_density", ld}};
  return j.dump();
}

HotspotGrid forecast_from_json(const std::string& text) {
  return parse_as(text, "forecast", [](const json& j) {
    if (j.value("kind", std::string()) != "forecast") throw SchemaError("not a forecast artifact");
    auto grid = std::make_shared<SpatialGrid>(grid_from_value(j.at("grid")));
    std::vector<double> ld;
    for (const auto& v : j.at("log_density")) {
      ld.push_back(v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>());
    }
    if (ld.size() != grid->cell_count()) throw SchemaError("forecast artifact: density length does not match the grid");
    HotspotGrid h = classify_cells(std::move(grid), std::move(ld));
    h.week = j.at("week").get<std::string>();
    h.window = TimeWindow::parse(j.at("window").get<std::string>());
    h.model_id = j.at("model_id").get<int>();
    return h;
  });
}

}  // namespace hotspot
