#include "hotspot/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "hotspot/diagnostics.hpp"
#include "hotspot/errors.hpp"
#include "hotspot/kernels.hpp"
#include "hotspot/parallel.hpp"

namespace hotspot {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> map_weights_by_lag(const FittedModel& model, std::span<const double> fitted,
                                       const MixturePoints& points, const ForecastOptions& options) {
  const MixturePoints& fit_points = model.fit_points;
  auto fitted_for = [&](int lag) -> std::optional<double> {
    for (std::size_t s = 0; s < fit_points.slots(); ++s) {
      if (fit_points.slot_lag[s] == lag) return fitted[s];
    }
    return std::nullopt;
  };
  double hist_sum = 0.0;
  std::size_t hist_count = 0;
  for (std::size_t s = 0; s < fit_points.slots(); ++s) {
    if (fit_points.slot_lag[s] != 0) {
      hist_sum += fitted[s];
      ++hist_count;
    }
  }
  const double hist_mean = hist_count > 0 ? hist_sum / static_cast<double>(hist_count) : 1.0;

  std::vector<double> w(points.slots(), 0.0);
  std::optional<std::size_t> expert_slot;
  std::size_t filled = 0;
  for (std::size_t s = 0; s < points.slots(); ++s) {
    const int lag = points.slot_lag[s];
    if (lag == 0) {
      expert_slot = s;
      continue;
    }
    if (auto v = fitted_for(lag)) {
      w[s] = *v;
    } else {
      w[s] = hist_mean;
      ++filled;
    }
  }
  if (filled > 0) {
    warn(std::to_string(filled) + " forecast block(s) had no fitted weight; using the mean history weight");
  }
  double hist_total = 0.0;
  for (std::size_t s = 0; s < w.size(); ++s) {
    if (!expert_slot || s != *expert_slot) hist_total += w[s];
  }
  if (expert_slot) {
    const auto fitted_e = fitted_for(0);
    if (fitted_e && !options.expert_weight) {
      w[*expert_slot] = *fitted_e;
    } else {
      const std::size_t k = points.slots() - 1;
      const double w_e = options.expert_weight.value_or(1.0 / static_cast<double>(k + 1));
      if (!(w_e >= 0.0 && w_e <= 1.0)) throw ArgumentError("expert weight must lie in [0, 1]");
      for (std::size_t s = 0; s < w.size(); ++s) {
        if (s != *expert_slot) w[s] = hist_total > 0.0 ? w[s] / hist_total * (1.0 - w_e) : 0.0;
      }
      w[*expert_slot] = w_e;
    }
  }
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0)) throw ForecastError("forecast weights vanish");
  for (double& v : w) v /= total;
  return w;
}

ForecastInput build_input(const FittedModel& model, const BlockedDataset& prediction,
                          const ModelParams& source, const ForecastOptions& options) {
  MixturePoints points = MixturePoints::from_blocks(prediction, true);
  if (points.size() == 0) throw ForecastError("forecast: the prediction blocks hold no events");
  if (source.weights.size() != model.fit_points.slots()) {
    throw ArgumentError("forecast: parameter weights do not match the fitted blocks");
  }
  ModelParams params = source;
  params.weights = map_weights_by_lag(model, source.weights, points, options);
  const MixtureDensity pilot = model.pilot();
  const LocalScales scales = compute_local_scales(points, pilot);
  Bandwidths bw = adaptive_bandwidths(params, scales);
  return ForecastInput(std::move(points), std::move(params), std::move(bw), options.eval);
}

double log_interval_mass(double center, const TimeWindow& window, double tau) {
  const double mass = von_mises_interval_mass(center, window.t1, window.t2, tau);
  return mass > 0.0 ? std::log(mass) : kNegInf;
}

}  // namespace

const char* to_string(HotspotClass c) {
  switch (c) {
    case HotspotClass::red:
      return "red";
    case HotspotClass::yellow:
      return "yellow";
    case HotspotClass::other:
      return "other";
  }
  return "other";
}

HotspotClass hotspot_class_from_string(const std::string& s) {
  if (s == "red") return HotspotClass::red;
  if (s == "yellow") return HotspotClass::yellow;
  if (s == "other") return HotspotClass::other;
  throw ArgumentError("unknown hotspot class '" + s + "'");
}

ForecastInput::ForecastInput(MixturePoints points, ModelParams params, Bandwidths bandwidths,
                             EvalOptions options)
    : density_(std::move(points), std::move(params), std::move(bandwidths), options) {}

ForecastInput ForecastInput::from_model(const FittedModel& model, const BlockedDataset& prediction,
                                        const ForecastOptions& options) {
  return build_input(model, prediction, model.mean(), options);
}

ForecastInput ForecastInput::from_model_draw(const FittedModel& model,
                                             const BlockedDataset& prediction,
                                             const ModelParams& draw,
                                             const ForecastOptions& options) {
  return build_input(model, prediction, draw, options);
}

double predictive_density_point(const ForecastInput& input, double lon, double lat, double hours) {
  if (!input.has_time()) return std::exp(input.density().log_spatial_density(lon, lat));
  return input.density().density(lon, lat, hours);
}

IntervalDensity::IntervalDensity(const ForecastInput& input, const TimeWindow& window)
    : input_(&input), window_(window) {
  if (!window.valid()) throw ArgumentError("invalid time window " + window.label());
  const MixturePoints& pts = input.points();
  const std::size_t n = pts.size();
  std::vector<double> log_mass(n, 0.0);
  if (input.has_time()) {
    const auto& tau = input.density().bandwidths().tau;
    parallel_for(n, [&](std::size_t p) { log_mass[p] = log_interval_mass(pts.hours[p], window, tau[p]); });
  }
  const auto& lpw = input.density().log_point_weight();
  std::vector<double> terms(n);
  for (std::size_t p = 0; p < n; ++p) terms[p] = lpw[p] + log_mass[p];
  log_norm_ = log_sum_exp(terms);
  if (!std::isfinite(log_norm_)) {
    throw ForecastError("window " + window.label() + " carries no probability mass");
  }
  extra_log_.resize(n);
  for (std::size_t p = 0; p < n; ++p) extra_log_[p] = log_mass[p] - log_norm_;
}

double IntervalDensity::log_value(double lon, double lat) const {
  return input_->density().log_weighted_spatial(lon, lat, extra_log_);
}

double IntervalDensity::value(double lon, double lat) const { return std::exp(log_value(lon, lat)); }

double interval_spatial_density(const ForecastInput& input, double lon, double lat,
                                const TimeWindow& window) {
  return IntervalDensity(input, window).value(lon, lat);
}

HotspotGrid classify_cells(std::shared_ptr<const SpatialGrid> grid, std::vector<double> log_density,
                           double red_pct, double yellow_pct) {
  const std::size_t n = log_density.size();
  if (grid && grid->cell_count() != n) throw ArgumentError("classify_cells: density length mismatch");
  for (double v : log_density) {
    if (std::isnan(v)) throw ForecastError("classify_cells: NaN density");
  }
  HotspotGrid out;
  out.grid = std::move(grid);
  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(), [&](int a, int b) {
    return log_density[static_cast<std::size_t>(a)] > log_density[static_cast<std::size_t>(b)];
  });
  const auto n_red = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * red_pct / 100.0 - 1e-9));
  const auto n_yellow =
      static_cast<std::size_t>(std::ceil(static_cast<double>(n) * yellow_pct / 100.0 - 1e-9));
  out.rank_pct.resize(n);
  out.classes.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto cell = static_cast<std::size_t>(out.order[r]);
    out.rank_pct[cell] = 100.0 * static_cast<double>(r + 1) / static_cast<double>(n);
    out.classes[cell] = r < n_red              ? HotspotClass::red
                        : r < n_red + n_yellow ? HotspotClass::yellow
                                               : HotspotClass::other;
  }
  out.density.resize(n);
  for (std::size_t c = 0; c < n; ++c) out.density[c] = std::exp(log_density[c]);
  out.log_density = std::move(log_density);
  return out;
}

HotspotGrid evaluate_grid(const ForecastInput& input, std::shared_ptr<const SpatialGrid> grid,
                          const TimeWindow& window) {
  if (!grid) throw ArgumentError("evaluate_grid: no grid");
  const IntervalDensity f(input, window);
  const std::size_t n = grid->cell_count();
  std::vector<double> log_d(n);
  parallel_for(n, [&](std::size_t c) {
    const GeoPoint p = grid->center(static_cast<int>(c));
    log_d[c] = f.log_value(p.lon, p.lat);
  });
  HotspotGrid out = classify_cells(std::move(grid), std::move(log_d));
  out.window = window;
  return out;
}

HotspotGrid evaluate_grid_posterior(const FittedModel& model, const BlockedDataset& prediction,
                                    std::shared_ptr<const SpatialGrid> grid, const TimeWindow& window,
                                    std::size_t max_draws, const ForecastOptions& options) {
  if (!grid) throw ArgumentError("evaluate_grid_posterior: no grid");
  std::vector<const ModelParams*> draws;
  for (const auto& ch : model.adaptive.chains) {
    for (const auto& d : ch.draws) draws.push_back(&d);
  }
  if (draws.empty() || max_draws == 0) throw ArgumentError("evaluate_grid_posterior: no draws");
  const std::size_t used = std::min(max_draws, draws.size());
  const std::size_t n = grid->cell_count();
  std::vector<std::vector<double>> per_draw(used, std::vector<double>(n));
  for (std::size_t k = 0; k < used; ++k) {
    const ModelParams& d = *draws[k * draws.size() / used];
    const ForecastInput input = ForecastInput::from_model_draw(model, prediction, d, options);
    const IntervalDensity f(input, window);
    parallel_for(n, [&](std::size_t c) {
      const GeoPoint p = grid->center(static_cast<int>(c));
      per_draw[k][c] = f.log_value(p.lon, p.lat);
    });
  }
  std::vector<double> log_d(n);
  std::vector<double> col(used);
  const double log_used = std::log(static_cast<double>(used));
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t k = 0; k < used; ++k) col[k] = per_draw[k][c];
    log_d[c] = log_sum_exp(col) - log_used;
  }
  HotspotGrid out = classify_cells(std::move(grid), std::move(log_d));
  out.window = window;
  return out;
}

ModelSpec ModelSpec::standard(int id) {
  ModelSpec s;
  s.id = id;
  switch (id) {
    case 1:
      s.history_weeks = 1;
      s.spatial_only = true;
      s.weights = WeightMode::single;
      s.accepts_expert = false;
      break;
    case 2:
      s.history_weeks = 1;
      s.weights = WeightMode::single;
      s.accepts_expert = false;
      break;
    case 3:
      s.bandwidth = BandwidthMode::srot_abramson;
      s.weights = WeightMode::equal;
      s.accepts_expert = false;
      break;
    case 4:
      s.spatial_only = true;
      s.accepts_expert = false;
      break;
    case 5:
      break;
    default:
      throw ArgumentError("unknown model id " + std::to_string(id) + " (expected 1-5)");
  }
  return s;
}

ForecastInput srot_abramson_input(const BlockedDataset& prediction, bool has_time, EvalOptions options) {
  MixturePoints points = MixturePoints::from_blocks(prediction, false);
  if (points.size() == 0) throw ForecastError("Model 3: the prediction blocks hold no events");
  const SrotBandwidths srot = srot_bandwidths(points, has_time);
  std::vector<double> weights(points.slots(), 1.0 / static_cast<double>(points.slots()));
  ModelParams params = abramson_params(srot, weights, has_time);
  const MixtureDensity pilot = preliminary_fixed_kde(points, params);
  const LocalScales scales = compute_local_scales(points, pilot);
  Bandwidths bw = abramson_adaptive(srot, scales, has_time);
  return ForecastInput(std::move(points), std::move(params), std::move(bw), options);
}

ModelRun run_model(const ModelSpec& spec, std::span<const EventRecord> events, Date forecast_week,
                   std::span<const TimeWindow> windows, std::shared_ptr<const SpatialGrid> grid,
                   const ModelRunConfig& config, const ExpertInputs* expert) {
  if (!grid) throw ArgumentError("run_model: no grid");
  if (windows.empty()) throw ArgumentError("run_model: no time windows");
  const int b = spec.weights == WeightMode::single ? 1 : spec.history_weeks;
  if (spec.weights == WeightMode::single && spec.history_weeks != 1) {
    throw ArgumentError("run_model: a single-weight model needs one week of history");
  }
  if (expert != nullptr && !spec.accepts_expert) {
    throw ArgumentError("run_model: Model " + std::to_string(spec.id) + " does not take intel");
  }
  const std::chrono::days len{config.block_length_days};
  const std::string week = format_date(forecast_week);
  ModelRun run;

  auto attach_expert = [](BlockedDataset& blocked, const std::vector<EventRecord>& pseudo) {
    if (pseudo.empty()) return;
    TemporalBlock block;
    block.index = 0;
    block.is_expert = true;
    block.events = pseudo;
    blocked.expert = std::move(block);
  };

  auto finish = [&](HotspotGrid g, const TimeWindow& w) {
    g.week = week;
    g.window = w;
    g.model_id = spec.id;
    run.grids.push_back(std::move(g));
  };

  if (spec.bandwidth == BandwidthMode::srot_abramson) {
    const BlockedDataset prediction = block_by_week(events, b, forecast_week, config.block_length_days);
    const ForecastInput input = srot_abramson_input(prediction, !spec.spatial_only, config.forecast.eval);
    for (const auto& w : windows) finish(evaluate_grid(input, grid, w), w);
    return run;
  }

  FitConfig fit_config = config.fit;
  fit_config.has_time = !spec.spatial_only;

  if (spec.spatial_only) {
    for (const auto& w : windows) {
      const std::vector<EventRecord> subset = filter_time_window(events, w);
      const BlockedDataset fit_blocked =
          block_by_week(subset, b, forecast_week - len, config.block_length_days);
      const BlockedDataset prediction = block_by_week(subset, b, forecast_week, config.block_length_days);
      FittedModel model = fit(fit_blocked, fit_config);
      const ForecastInput input = ForecastInput::from_model(model, prediction, config.forecast);
      finish(evaluate_grid(input, grid, w), w);
      run.fits.push_back(std::move(model));
    }
    return run;
  }

  BlockedDataset fit_blocked = block_by_week(events, b, forecast_week - len, config.block_length_days);
  BlockedDataset prediction = block_by_week(events, b, forecast_week, config.block_length_days);
  if (expert != nullptr) {
    attach_expert(fit_blocked, expert->fit_block);
    attach_expert(prediction, expert->forecast_block);
  }
  FittedModel model = fit(fit_blocked, fit_config);
  const ForecastInput input = ForecastInput::from_model(model, prediction, config.forecast);
  for (const auto& w : windows) finish(evaluate_grid(input, grid, w), w);
  run.fits.push_back(std::move(model));
  return run;
}

namespace {

nlohmann::json cell_polygon(const SpatialGrid& grid, int cell) {
  const auto c = grid.corners(cell);
  nlohmann::json ring = nlohmann::json::array();
  for (const auto& p : c) ring.push_back({p.lon, p.lat});
  ring.push_back({c[0].lon, c[0].lat});
  return {{"type", "Polygon"}, {"coordinates", nlohmann::json::array({ring})}};
}

}  // namespace

void write_forecast_geojson(std::ostream& out, const HotspotGrid& hotspots) {
  if (!hotspots.grid) throw ArgumentError("write_forecast_geojson: no grid");
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t c = 0; c < hotspots.cell_count(); ++c) {
    const int id = static_cast<int>(c);
    features.push_back({{"type", "Feature"},
                        {"geometry", cell_polygon(*hotspots.grid, id)},
                        {"properties",
                         {{"cell_id", id},
                          {"density", hotspots.density[c]},
                          {"rank_pct", hotspots.rank_pct[c]},
                          {"class", to_string(hotspots.classes[c])}}}});
  }
  nlohmann::json fc = {{"type", "FeatureCollection"},
                       {"properties",
                        {{"week", hotspots.week},
                         {"window", hotspots.window.label()},
                         {"model", hotspots.model_id}}},
                       {"features", std::move(features)}};
  out << fc.dump();
}

std::string forecast_geojson(const HotspotGrid& hotspots) {
  std::ostringstream os;
  write_forecast_geojson(os, hotspots);
  return os.str();
}

void write_forecast_csv(std::ostream& out, const HotspotGrid& hotspots) {
  out << "cell_id,density,rank_pct,class\n";
  out.precision(17);
  for (std::size_t c = 0; c < hotspots.cell_count(); ++c) {
    out << c << ',' << hotspots.density[c] << ',' << hotspots.rank_pct[c] << ','
        << to_string(hotspots.classes[c]) << '\n';
  }
}

void write_grid_geojson(std::ostream& out, const SpatialGrid& grid) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const int id = static_cast<int>(c);
    const GeoPoint center = grid.center(id);
    features.push_back({{"type", "Feature"},
                        {"geometry", cell_polygon(grid, id)},
                        {"properties", {{"cell_id", id}, {"lon", center.lon}, {"lat", center.lat}}}});
  }
  out << nlohmann::json{{"type", "FeatureCollection"}, {"features", std::move(features)}}.dump();
}

}  // namespace hotspot
