#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hotspot/bandwidth_rules.hpp"
#include "hotspot/data_model.hpp"
#include "hotspot/density.hpp"
#include "hotspot/inference.hpp"

namespace hotspot {

enum class HotspotClass { red, yellow, other };

const char* to_string(HotspotClass c);
HotspotClass hotspot_class_from_string(const std::string& s);

struct ForecastOptions {
  EvalOptions eval;
  // w_E used when the model was fitted without an expert block.
  std::optional<double> expert_weight;
};

// The approximate predictive density for the block after the fit: the B most
// recent blocks (plus an optional expert block) with primed scales taken
// against the fit's pilot and weights mapped by lag.
class ForecastInput {
 public:
  ForecastInput(MixturePoints points, ModelParams params, Bandwidths bandwidths,
                EvalOptions options = {});

  // `prediction.historical` holds the B blocks preceding the forecast week;
  // `prediction.expert` is the intel for that week, if any.
  static ForecastInput from_model(const FittedModel& model, const BlockedDataset& prediction,
                                  const ForecastOptions& options = {});
  // Same, evaluated at a single posterior draw instead of the mean.
  static ForecastInput from_model_draw(const FittedModel& model, const BlockedDataset& prediction,
                                       const ModelParams& draw, const ForecastOptions& options = {});

  const MixtureDensity& density() const { return density_; }
  const MixturePoints& points() const { return density_.points(); }
  const ModelParams& params() const { return density_.params(); }
  bool has_time() const { return density_.has_time(); }

 private:
  MixtureDensity density_;
};

// Spatio-temporal density at (lon, lat, hours). Spatial-only inputs ignore hours.
double predictive_density_point(const ForecastInput& input, double lon, double lat, double hours);

// Predictive spatial density for one window of the day. Per-point interval
// masses and the normaliser are computed once at construction.
class IntervalDensity {
 public:
  IntervalDensity(const ForecastInput& input, const TimeWindow& window);

  double log_value(double lon, double lat) const;
  double value(double lon, double lat) const;
  const TimeWindow& window() const { return window_; }
  double log_normalizer() const { return log_norm_; }

 private:
  const ForecastInput* input_;
  TimeWindow window_;
  std::vector<double> extra_log_;  // log mass - log normaliser
  double log_norm_ = 0.0;
};

double interval_spatial_density(const ForecastInput& input, double lon, double lat,
                                const TimeWindow& window);

struct HotspotGrid {
  std::shared_ptr<const SpatialGrid> grid;
  std::string week;  // forecast week start, YYYY-MM-DD
  TimeWindow window;
  int model_id = 0;
  std::vector<double> density;      // per cell id
  std::vector<double> log_density;  // per cell id
  std::vector<int> order;           // cell ids, most likely first
  std::vector<double> rank_pct;     // 100 * rank / N, rank 1 = most likely
  std::vector<HotspotClass> classes;

  std::size_t cell_count() const { return density.size(); }
};

inline constexpr double kRedPercent = 20.0;
inline constexpr double kYellowPercent = 20.0;

// Ranks by log density (descending, ties by ascending cell id): the first
// ceil(red%) cells are red, the next ceil(yellow%) yellow.
HotspotGrid classify_cells(std::shared_ptr<const SpatialGrid> grid, std::vector<double> log_density,
                           double red_pct = kRedPercent, double yellow_pct = kYellowPercent);

HotspotGrid evaluate_grid(const ForecastInput& input, std::shared_ptr<const SpatialGrid> grid,
                          const TimeWindow& window);

// Averages the interval density over up to `max_draws` posterior draws
// (evenly spaced through the pooled chains).
HotspotGrid evaluate_grid_posterior(const FittedModel& model, const BlockedDataset& prediction,
                                    std::shared_ptr<const SpatialGrid> grid, const TimeWindow& window,
                                    std::size_t max_draws, const ForecastOptions& options = {});

// --- model zoo -------------------------------------------------------------

enum class BandwidthMode { bayesian_adaptive, srot_abramson };
enum class WeightMode { estimated, equal, single };

struct ModelSpec {
  int id = 5;
  int history_weeks = 52;
  bool spatial_only = false;
  BandwidthMode bandwidth = BandwidthMode::bayesian_adaptive;
  WeightMode weights = WeightMode::estimated;
  bool accepts_expert = true;

  // Models 1-5 of the comparison table.
  static ModelSpec standard(int id);
};

struct ModelRunConfig {
  FitConfig fit;
  ForecastOptions forecast;
  int block_length_days = 7;
};

// Intel for a Model 5 run: pseudo-events for the training week (enter the
// fit as the expert block) and for the forecast week.
struct ExpertInputs {
  std::vector<EventRecord> fit_block;
  std::vector<EventRecord> forecast_block;
};

struct ModelRun {
  std::vector<HotspotGrid> grids;  // one per window, in input order
  std::vector<FittedModel> fits;   // empty for Model 3
};

// Forecast for the block starting at `forecast_week`. The fit trains on the
// block before it with `history_weeks` blocks of history.
ModelRun run_model(const ModelSpec& spec, std::span<const EventRecord> events, Date forecast_week,
                   std::span<const TimeWindow> windows, std::shared_ptr<const SpatialGrid> grid,
                   const ModelRunConfig& config, const ExpertInputs* expert = nullptr);

// Model 3 input for the blocks in `prediction` (equal weights, Abramson scales).
ForecastInput srot_abramson_input(const BlockedDataset& prediction, bool has_time,
                                  EvalOptions options = {});

// --- export ----------------------------------------------------------------

// FeatureCollection of cell polygons with {cell_id, density, rank_pct, class}.
void write_forecast_geojson(std::ostream& out, const HotspotGrid& hotspots);
std::string forecast_geojson(const HotspotGrid& hotspots);
// cell_id,density,rank_pct,class
void write_forecast_csv(std::ostream& out, const HotspotGrid& hotspots);
// FeatureCollection of cell polygons with {cell_id, lon, lat}.
void write_grid_geojson(std::ostream& out, const SpatialGrid& grid);

}  // namespace hotspot
