#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hotspot/data_model.hpp"
#include "hotspot/expert.hpp"
#include "hotspot/forecast.hpp"

namespace hotspot {

// Cumulative share of events against share of cells, cells taken in ranking
// order. Point k covers the first k cells; there are N + 1 points.
struct EventAreaCurve {
  std::vector<double> area;
  std::vector<double> capture;
  std::size_t events = 0;   // events that fell in a grid cell
  std::size_t outside = 0;  // events outside every masked-in cell

  bool empty() const { return events == 0; }
};

// `counts[cell]` events per cell; `order` lists cell ids best first.
EventAreaCurve event_area_curve_from_ranking(std::span<const int> order,
                                             std::span<const std::size_t> counts);
// Events outside `window` are ignored.
EventAreaCurve event_area_curve(const HotspotGrid& hotspots, std::span<const EventRecord> actual,
                                const TimeWindow& window);

// Trapezoidal area; nullopt for an empty curve.
std::optional<double> auc(const EventAreaCurve& curve);

// Cells in the top k percent: ceil(N k / 100).
std::size_t top_cell_count(std::size_t cells, double k_pct);
std::optional<double> capture_at_topk(const EventAreaCurve& curve, double k_pct);
std::optional<double> capture_at_topk(const HotspotGrid& hotspots, std::span<const EventRecord> actual,
                                      const TimeWindow& window, double k_pct);
std::optional<double> pai(const EventAreaCurve& curve, double k_pct);
std::optional<double> pai(const HotspotGrid& hotspots, std::span<const EventRecord> actual,
                          const TimeWindow& window, double k_pct);

// Row-stochastic: entry (c1, c2) is the share of cells of class c1 in `a`
// that have class c2 in `b`. A class absent from `a` gets an identity row.
using TransitionMatrix = std::array<std::array<double, 3>, 3>;
TransitionMatrix transition_matrix(const HotspotGrid& a, const HotspotGrid& b);
TransitionMatrix average_transitions(std::span<const TransitionMatrix> matrices);

enum class CellChange { unchanged, new_hot, cooled };  // blue = new_hot, green = cooled
const char* to_string(CellChange c);

struct MapDiff {
  std::vector<CellChange> changes;
  std::size_t blue = 0;
  std::size_t green = 0;
  double blue_fraction = 0.0;
  double green_fraction = 0.0;
};
MapDiff diff_maps(const HotspotGrid& a, const HotspotGrid& b);

struct KeyLocationCounts {
  std::size_t red = 0;
  std::size_t yellow = 0;
  std::size_t other = 0;
  std::size_t outside = 0;
  std::size_t total() const { return red + yellow + other + outside; }
};
std::map<std::string, KeyLocationCounts> key_location_report(const HotspotGrid& hotspots,
                                                             std::span<const KeyLocation> locations);

// --- backtests -------------------------------------------------------------

struct IntelSetting {
  double proportion = 0.5;
  double radius_m = 100.0;
  std::string label() const;  // "p=0.5,d=100"
};

struct MetricRow {
  int model = 0;
  std::string week;
  TimeWindow window;
  std::string intel = "none";
  std::size_t events = 0;
  std::optional<double> auc;
  std::optional<double> capture20;
  std::optional<double> capture40;
  std::optional<double> pai20;
  std::optional<double> pai40;
};

struct MetricSummary {
  int model = 0;
  std::string window;  // "all" for the across-window average
  std::string intel = "none";
  std::size_t weeks = 0;          // weeks with events
  std::size_t empty_weeks = 0;    // excluded for lack of events
  double auc_mean = 0.0;
  double auc_sd = 0.0;
  double capture20_mean = 0.0;
  double capture40_mean = 0.0;
  double pai20_mean = 0.0;
};

struct BacktestConfig {
  ModelRunConfig run;
  std::vector<int> models{1, 2, 3, 4, 5};
  std::vector<Date> weeks;  // forecast weeks
  std::vector<TimeWindow> windows;
  std::vector<IntelSetting> intel;  // Model 5 only
  // Replaces the default history length of the multi-week models (3, 4, 5).
  std::optional<int> history_weeks;
  int intel_seeds = 10;
  std::uint64_t intel_seed = 1;
};

struct BacktestFailure {
  int model = 0;
  std::string week;
  std::string reason;
};

struct BacktestResult {
  std::vector<MetricRow> rows;  // intel rows are averaged over seeds
  std::vector<MetricSummary> summary;
  std::vector<BacktestFailure> failures;
};

// Row metrics for a map against the actual events of its week.
MetricRow score_map(const HotspotGrid& hotspots, std::span<const EventRecord> week_events);

BacktestResult backtest(std::span<const EventRecord> events, std::shared_ptr<const SpatialGrid> grid,
                        const BacktestConfig& config);

std::vector<MetricSummary> summarize_rows(std::span<const MetricRow> rows);

// Mean AUC with intel minus mean AUC without, times 100 (percentage points).
std::optional<double> intel_improvement_percent(std::span<const MetricSummary> summary, int model,
                                                const std::string& intel_label);

struct StalenessRow {
  int lag = 0;
  std::size_t samples = 0;
  double mean = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
};

struct StalenessResult {
  std::vector<StalenessRow> rows;
  std::vector<std::string> notices;  // lags dropped for lack of history
};

// Week w is scored with the map made for week w - L (the map not refreshed
// for L weeks). AUC per week is the mean over windows.
StalenessResult staleness_analysis(std::span<const EventRecord> events,
                                   std::shared_ptr<const SpatialGrid> grid, const ModelSpec& spec,
                                   std::span<const Date> weeks, std::span<const int> lags,
                                   std::span<const TimeWindow> windows, const ModelRunConfig& config);

// --- CSV output --------------------------------------------------------------

using Manifest = std::vector<std::pair<std::string, std::string>>;
void write_manifest(std::ostream& out, const Manifest& manifest);  // "# key=value" lines
void write_metric_rows_csv(std::ostream& out, std::span<const MetricRow> rows, const Manifest& manifest = {});
void write_summary_csv(std::ostream& out, std::span<const MetricSummary> rows, const Manifest& manifest = {});
void write_curve_csv(std::ostream& out, const EventAreaCurve& curve, const Manifest& manifest = {});
void write_transition_csv(std::ostream& out, const TransitionMatrix& m, const Manifest& manifest = {});
void write_staleness_csv(std::ostream& out, const StalenessResult& r, const Manifest& manifest = {});

// --- synthetic data ----------------------------------------------------------

struct SyntheticCluster {
  double lon = 0.0;
  double lat = 0.0;
  double sd_km = 0.3;
  double weight = 1.0;
  double peak_hour = 20.0;
  double tau = 2.0;  // von Mises concentration of the time profile
  double drift_lon_km = 0.0;  // per week
  double drift_lat_km = 0.0;
};

struct SyntheticSpec {
  BBox bbox{77.14, 28.55, 77.26, 28.66};
  int clusters = 40;
  std::vector<SyntheticCluster> explicit_clusters;  // used instead when non-empty
  int weeks = 60;
  Date start{std::chrono::year{2019} / 1 / 6};  // a Sunday
  double events_per_week = 100.0;
  double background_share = 0.1;  // uniform over the bbox and the day
  double sd_km_min = 0.15;
  double sd_km_max = 0.6;
  double tau_min = 0.5;
  double tau_max = 4.0;
  double drift_km_per_week = 0.0;
  std::uint64_t seed = 1;
};

struct SyntheticDataset {
  SyntheticSpec spec;
  std::vector<SyntheticCluster> clusters;
  std::vector<EventRecord> events;

  // Ground-truth density at the given week (lon/lat degrees, hours).
  double density(double lon, double lat, double hours, Date week) const;
  // Ground-truth spatial density of events falling in `window`.
  double window_density(double lon, double lat, const TimeWindow& window, Date week) const;
  Date week_start(int k) const;
};

SyntheticDataset generate_synthetic_events(const SyntheticSpec& spec);

// Map whose ranking follows the ground truth for the week and window.
HotspotGrid ground_truth_map(const SyntheticDataset& data, std::shared_ptr<const SpatialGrid> grid,
                             Date week, const TimeWindow& window);

}  // namespace hotspot
