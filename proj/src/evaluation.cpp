#include "hotspot/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "hotspot/csv.hpp"
#include "hotspot/diagnostics.hpp"
#include "hotspot/errors.hpp"
#include "hotspot/kernels.hpp"
#include "hotspot/parallel.hpp"
#include "hotspot/rng.hpp"

namespace hotspot {
namespace {

std::size_t class_index(HotspotClass c) {
  switch (c) {
    case HotspotClass::red:
      return 0;
    case HotspotClass::yellow:
      return 1;
    case HotspotClass::other:
      return 2;
  }
  return 2;
}

void require_same_grid(const HotspotGrid& a, const HotspotGrid& b) {
  if (a.cell_count() != b.cell_count() || (a.grid && b.grid && !(*a.grid == *b.grid))) {
    throw ArgumentError("maps are on different grids");
  }
}

double quantile7(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  const double pos = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::uint64_t label_key(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t day_key(Date d) { return static_cast<std::uint64_t>(d.time_since_epoch().count() + (1LL << 40)); }

}  // namespace

EventAreaCurve event_area_curve_from_ranking(std::span<const int> order,
                                             std::span<const std::size_t> counts) {
  EventAreaCurve curve;
  const std::size_t n = order.size();
  if (counts.size() != n) throw ArgumentError("event_area_curve: ranking and counts differ in length");
  for (std::size_t c : counts) curve.events += c;
  curve.area.resize(n + 1);
  curve.capture.resize(n + 1);
  std::size_t acc = 0;
  curve.area[0] = 0.0;
  curve.capture[0] = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += counts[static_cast<std::size_t>(order[k])];
    curve.area[k + 1] = static_cast<double>(k + 1) / static_cast<double>(n);
    curve.capture[k + 1] = curve.events > 0 ? static_cast<double>(acc) / static_cast<double>(curve.events) : 0.0;
  }
  return curve;
}

EventAreaCurve event_area_curve(const HotspotGrid& hotspots, std::span<const EventRecord> actual,
                                const TimeWindow& window) {
  if (!hotspots.grid) throw ArgumentError("event_area_curve: map has no grid");
  std::vector<std::size_t> counts(hotspots.cell_count(), 0);
  std::size_t outside = 0;
  for (const auto& e : actual) {
    if (!window.contains(e.time_of_day)) continue;
    if (const auto cell = hotspots.grid->cell_of(e.lon, e.lat)) {
      ++counts[static_cast<std::size_t>(*cell)];
    } else {
      ++outside;
    }
  }
  EventAreaCurve curve = event_area_curve_from_ranking(hotspots.order, counts);
  curve.outside = outside;
  return curve;
}

std::optional<double> auc(const EventAreaCurve& curve) {
  if (curve.empty()) return std::nullopt;
  double a = 0.0;
  for (std::size_t k = 1; k < curve.area.size(); ++k) {
    a += 0.5 * (curve.capture[k] + curve.capture[k - 1]) * (curve.area[k] - curve.area[k - 1]);
  }
  return a;
}

std::size_t top_cell_count(std::size_t cells, double k_pct) {
  if (!(k_pct > 0.0 && k_pct <= 100.0)) throw ArgumentError("k must lie in (0, 100]");
  const auto m = static_cast<std::size_t>(std::ceil(static_cast<double>(cells) * k_pct / 100.0 - 1e-9));
  return std::min(m, cells);
}

std::optional<double> capture_at_topk(const EventAreaCurve& curve, double k_pct) {
  const std::size_t cells = curve.area.empty() ? 0 : curve.area.size() - 1;
  const std::size_t m = top_cell_count(cells, k_pct);
  if (curve.empty()) return std::nullopt;
  return curve.capture[m];
}

std::optional<double> capture_at_topk(const HotspotGrid& hotspots, std::span<const EventRecord> actual,
                                      const TimeWindow& window, double k_pct) {
  return capture_at_topk(event_area_curve(hotspots, actual, window), k_pct);
}

std::optional<double> pai(const EventAreaCurve& curve, double k_pct) {
  const auto cap = capture_at_topk(curve, k_pct);
  if (!cap) return std::nullopt;
  return *cap / (k_pct / 100.0);
}

std::optional<double> pai(const HotspotGrid& hotspots, std::span<const EventRecord> actual,
                          const TimeWindow& window, double k_pct) {
  return pai(event_area_curve(hotspots, actual, window), k_pct);
}

TransitionMatrix transition_matrix(const HotspotGrid& a, const HotspotGrid& b) {
  require_same_grid(a, b);
  std::array<std::array<std::size_t, 3>, 3> counts{};
  for (std::size_t c = 0; c < a.cell_count(); ++c) {
    ++counts[class_index(a.classes[c])][class_index(b.classes[c])];
  }
  TransitionMatrix m{};
  for (std::size_t i = 0; i < 3; ++i) {
    std::size_t row = 0;
    for (std::size_t j = 0; j < 3; ++j) row += counts[i][j];
    for (std::size_t j = 0; j < 3; ++j) {
      m[i][j] = row > 0 ? static_cast<double>(counts[i][j]) / static_cast<double>(row) : (i == j ? 1.0 : 0.0);
    }
  }
  return m;
}

TransitionMatrix average_transitions(std::span<const TransitionMatrix> matrices) {
  if (matrices.empty()) throw ArgumentError("average_transitions: no matrices");
  TransitionMatrix avg{};
  for (const auto& m : matrices) {
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) avg[i][j] += m[i][j];
    }
  }
  for (auto& row : avg) {
    for (double& v : row) v /= static_cast<double>(matrices.size());
  }
  return avg;
}

const char* to_string(CellChange c) {
  switch (c) {
    case CellChange::unchanged:
      return "unchanged";
    case CellChange::new_hot:
      return "blue";
    case CellChange::cooled:
      return "green";
  }
  return "unchanged";
}

MapDiff diff_maps(const HotspotGrid& a, const HotspotGrid& b) {
  require_same_grid(a, b);
  MapDiff d;
  const std::size_t n = a.cell_count();
  d.changes.resize(n, CellChange::unchanged);
  for (std::size_t c = 0; c < n; ++c) {
    const bool hot_a = a.classes[c] != HotspotClass::other;
    const bool hot_b = b.classes[c] != HotspotClass::other;
    if (!hot_a && hot_b) {
      d.changes[c] = CellChange::new_hot;
      ++d.blue;
    } else if (hot_a && !hot_b) {
      d.changes[c] = CellChange::cooled;
      ++d.green;
    }
  }
  if (n > 0) {
    d.blue_fraction = static_cast<double>(d.blue) / static_cast<double>(n);
    d.green_fraction = static_cast<double>(d.green) / static_cast<double>(n);
  }
  return d;
}

std::map<std::string, KeyLocationCounts> key_location_report(const HotspotGrid& hotspots,
                                                             std::span<const KeyLocation> locations) {
  if (!hotspots.grid) throw ArgumentError("key_location_report: map has no grid");
  std::map<std::string, KeyLocationCounts> out;
  for (const auto& loc : locations) {
    auto& counts = out[loc.type];
    const auto cell = hotspots.grid->cell_of(loc.lon, loc.lat);
    if (!cell) {
      ++counts.outside;
      continue;
    }
    switch (hotspots.classes[static_cast<std::size_t>(*cell)]) {
      case HotspotClass::red:
        ++counts.red;
        break;
      case HotspotClass::yellow:
        ++counts.yellow;
        break;
      case HotspotClass::other:
        ++counts.other;
        break;
    }
  }
  return out;
}

std::string IntelSetting::label() const { return "p=" + fmt(proportion) + ",d=" + fmt(radius_m); }

MetricRow score_map(const HotspotGrid& hotspots, std::span<const EventRecord> week_events) {
  MetricRow row;
  row.model = hotspots.model_id;
  row.week = hotspots.week;
  row.window = hotspots.window;
  const EventAreaCurve curve = event_area_curve(hotspots, week_events, hotspots.window);
  row.events = curve.events;
  row.auc = auc(curve);
  row.capture20 = capture_at_topk(curve, 20.0);
  row.capture40 = capture_at_topk(curve, 40.0);
  row.pai20 = pai(curve, 20.0);
  row.pai40 = pai(curve, 40.0);
  return row;
}

namespace {

void accumulate_rows(std::vector<MetricRow>& target, const std::vector<MetricRow>& add) {
  if (target.empty()) {
    target = add;
    return;
  }
  auto plus = [](std::optional<double>& a, const std::optional<double>& b) {
    if (a && b) {
      *a += *b;
    } else {
      a.reset();
    }
  };
  for (std::size_t k = 0; k < target.size(); ++k) {
    plus(target[k].auc, add[k].auc);
    plus(target[k].capture20, add[k].capture20);
    plus(target[k].capture40, add[k].capture40);
    plus(target[k].pai20, add[k].pai20);
    plus(target[k].pai40, add[k].pai40);
  }
}

void scale_rows(std::vector<MetricRow>& rows, double factor) {
  for (auto& r : rows) {
    for (auto* v : {&r.auc, &r.capture20, &r.capture40, &r.pai20, &r.pai40}) {
      if (*v) **v *= factor;
    }
  }
}

ModelSpec backtest_spec(int id, const BacktestConfig& config) {
  ModelSpec spec = ModelSpec::standard(id);
  if (config.history_weeks && spec.weights != WeightMode::single) spec.history_weeks = *config.history_weeks;
  return spec;
}

}  // namespace

BacktestResult backtest(std::span<const EventRecord> events, std::shared_ptr<const SpatialGrid> grid,
                        const BacktestConfig& config) {
  if (config.windows.empty()) throw ArgumentError("backtest: no windows");
  BacktestResult result;
  const std::chrono::days len{config.run.block_length_days};
  const auto& canonical = canonical_windows();
  for (const Date week : config.weeks) {
    const std::vector<EventRecord> actual = events_between(events, week, week + len);
    for (int id : config.models) {
      try {
        const ModelRun run = run_model(backtest_spec(id, config), events, week, config.windows, grid, config.run);
        for (const auto& g : run.grids) result.rows.push_back(score_map(g, actual));
      } catch (const std::exception& e) {
        result.failures.push_back({id, format_date(week), e.what()});
        warn("backtest: Model " + std::to_string(id) + " week " + format_date(week) + ": " + e.what());
      }
    }
    if (config.intel.empty()) continue;
    const std::vector<EventRecord> training = events_between(events, week - len, week);
    for (const auto& setting : config.intel) {
      std::vector<MetricRow> sum;
      int used = 0;
      for (int s = 0; s < config.intel_seeds; ++s) {
        const std::uint64_t key = Rng::stream({config.intel_seed, label_key(setting.label()), day_key(week),
                                               static_cast<std::uint64_t>(s)})();
        const auto fit_intel = simulate_expert_intel(training, {setting.proportion, setting.radius_m, key}, canonical);
        const auto fc_intel =
            simulate_expert_intel(actual, {setting.proportion, setting.radius_m, key ^ 0x5EEDULL}, canonical);
        ExpertInputs expert{intel_to_events(fit_intel), intel_to_events(fc_intel)};
        try {
          const ModelRun run =
              run_model(backtest_spec(5, config), events, week, config.windows, grid, config.run, &expert);
          std::vector<MetricRow> rows;
          for (const auto& g : run.grids) {
            MetricRow r = score_map(g, actual);
            r.intel = setting.label();
            rows.push_back(std::move(r));
          }
          accumulate_rows(sum, rows);
          ++used;
        } catch (const std::exception& e) {
          result.failures.push_back({5, format_date(week), setting.label() + ": " + e.what()});
          warn("backtest: Model 5 week " + format_date(week) + " " + setting.label() + ": " + e.what());
        }
      }
      if (used > 0) {
        scale_rows(sum, 1.0 / used);
        result.rows.insert(result.rows.end(), sum.begin(), sum.end());
      }
    }
  }
  result.summary = summarize_rows(result.rows);
  return result;
}

std::vector<MetricSummary> summarize_rows(std::span<const MetricRow> rows) {
  struct Acc {
    std::vector<double> auc;
    std::vector<double> cap20;
    std::vector<double> cap40;
    std::vector<double> pai20;
    std::size_t empty = 0;
  };
  std::map<std::tuple<int, std::string, std::string>, Acc> groups;
  for (const auto& r : rows) {
    for (const std::string& w : {r.window.label(), std::string("all")}) {
      Acc& acc = groups[{r.model, r.intel, w}];
      if (!r.auc) {
        ++acc.empty;
        continue;
      }
      acc.auc.push_back(*r.auc);
      acc.cap20.push_back(r.capture20.value_or(0.0));
      acc.cap40.push_back(r.capture40.value_or(0.0));
      acc.pai20.push_back(r.pai20.value_or(0.0));
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  std::vector<MetricSummary> out;
  for (const auto& [key, acc] : groups) {
    MetricSummary s;
    s.model = std::get<0>(key);
    s.intel = std::get<1>(key);
    s.window = std::get<2>(key);
    s.weeks = acc.auc.size();
    s.empty_weeks = acc.empty;
    s.auc_mean = mean(acc.auc);
    double ss = 0.0;
    for (double x : acc.auc) ss += (x - s.auc_mean) * (x - s.auc_mean);
    s.auc_sd = acc.auc.size() > 1 ? std::sqrt(ss / static_cast<double>(acc.auc.size() - 1)) : 0.0;
    s.capture20_mean = mean(acc.cap20);
    s.capture40_mean = mean(acc.cap40);
    s.pai20_mean = mean(acc.pai20);
    out.push_back(s);
  }
  return out;
}

std::optional<double> intel_improvement_percent(std::span<const MetricSummary> summary, int model,
                                                const std::string& intel_label) {
  std::optional<double> base;
  std::optional<double> with;
  for (const auto& s : summary) {
    if (s.model != model || s.window != "all" || s.weeks == 0) continue;
    if (s.intel == "none") base = s.auc_mean;
    if (s.intel == intel_label) with = s.auc_mean;
  }
  if (!base || !with) return std::nullopt;
  return 100.0 * (*with - *base);
}

StalenessResult staleness_analysis(std::span<const EventRecord> events,
                                   std::shared_ptr<const SpatialGrid> grid, const ModelSpec& spec,
                                   std::span<const Date> weeks, std::span<const int> lags,
                                   std::span<const TimeWindow> windows, const ModelRunConfig& config) {
  StalenessResult result;
  const std::chrono::days len{config.block_length_days};
  std::map<Date, std::optional<std::vector<HotspotGrid>>> maps;
  auto map_for = [&](Date w) -> const std::optional<std::vector<HotspotGrid>>& {
    auto it = maps.find(w);
    if (it != maps.end()) return it->second;
    std::optional<std::vector<HotspotGrid>> value;
    try {
      value = run_model(spec, events, w, windows, grid, config).grids;
    } catch (const ArgumentError&) {
      value.reset();
    } catch (const FitError&) {
      value.reset();
    }
    return maps.emplace(w, std::move(value)).first->second;
  };
  for (int lag : lags) {
    if (lag < 0) throw ArgumentError("staleness lag must be non-negative");
    std::vector<double> per_week;
    std::size_t missing = 0;
    for (const Date w : weeks) {
      const auto& m = map_for(w - len * lag);
      if (!m) {
        ++missing;
        continue;
      }
      const std::vector<EventRecord> actual = events_between(events, w, w + len);
      double sum = 0.0;
      int count = 0;
      for (const auto& g : *m) {
        if (const auto a = auc(event_area_curve(g, actual, g.window))) {
          sum += *a;
          ++count;
        }
      }
      if (count > 0) per_week.push_back(sum / count);
    }
    if (missing > 0) {
      result.notices.push_back("lag " + std::to_string(lag) + ": " + std::to_string(missing) +
                               " week(s) lack the history for a map");
    }
    if (per_week.empty()) continue;
    StalenessRow row;
    row.lag = lag;
    row.samples = per_week.size();
    for (double v : per_week) row.mean += v;
    row.mean /= static_cast<double>(per_week.size());
    row.p10 = quantile7(per_week, 0.1);
    row.p90 = quantile7(per_week, 0.9);
    result.rows.push_back(row);
  }
  return result;
}

void write_manifest(std::ostream& out, const Manifest& manifest) {
  for (const auto& [k, v] : manifest) out << "# " << k << '=' << v << '\n';
}

void write_metric_rows_csv(std::ostream& out, std::span<const MetricRow> rows, const Manifest& manifest) {
  write_manifest(out, manifest);
  out << "model,week,window,intel,events,auc,capture20,capture40,pai20,pai40\n";
  for (const auto& r : rows) {
    out << r.model << ',' << r.week << ',' << r.window.label() << ',' << csv_escape(r.intel) << ',' << r.events
        << ',' << fmt(r.auc) << ',' << fmt(r.capture20) << ',' << fmt(r.capture40) << ',' << fmt(r.pai20) << ','
        << fmt(r.pai40) << '\n';
  }
}

void write_summary_csv(std::ostream& out, std::span<const MetricSummary> rows, const Manifest& manifest) {
  write_manifest(out, manifest);
  out << "model,window,intel,weeks,empty_weeks,auc_mean,auc_sd,capture20_mean,capture40_mean,pai20_mean\n";
  for (const auto& s : rows) {
    out << s.model << ',' << s.window << ',' << csv_escape(s.intel) << ',' << s.weeks << ',' << s.empty_weeks
        << ',' << fmt(s.auc_mean) << ',' << fmt(s.auc_sd) << ',' << fmt(s.capture20_mean) << ','
        << fmt(s.capture40_mean) << ',' << fmt(s.pai20_mean) << '\n';
  }
}

void write_curve_csv(std::ostream& out, const EventAreaCurve& curve, const Manifest& manifest) {
  write_manifest(out, manifest);
  out << "area_fraction,capture_fraction\n";
  for (std::size_t k = 0; k < curve.area.size(); ++k) out << fmt(curve.area[k]) << ',' << fmt(curve.capture[k]) << '\n';
}

void write_transition_csv(std::ostream& out, const TransitionMatrix& m, const Manifest& manifest) {
  write_manifest(out, manifest);
  static const char* kNames[] = {"red", "yellow", "other"};
  out << "from,red,yellow,other\n";
  for (std::size_t i = 0; i < 3; ++i) {
    out << kNames[i];
    for (std::size_t j = 0; j < 3; ++j) out << ',' << fmt(m[i][j]);
    out << '\n';
  }
}

void write_staleness_csv(std::ostream& out, const StalenessResult& r, const Manifest& manifest) {
  write_manifest(out, manifest);
  for (const auto& n : r.notices) out << "# notice=" << n << '\n';
  out << "lag,samples,auc_mean,auc_p10,auc_p90\n";
  for (const auto& row : r.rows) {
    out << row.lag << ',' << row.samples << ',' << fmt(row.mean) << ',' << fmt(row.p10) << ',' << fmt(row.p90)
        << '\n';
  }
}

// --- synthetic ---------------------------------------------------------------

namespace {

// Best & Fisher rejection sampler; returns an angle in (-pi, pi].
double sample_von_mises_angle(double kappa, Rng& rng) {
  if (kappa < 1e-8) return std::numbers::pi * (2.0 * rng.uniform() - 1.0);
  const double a = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double b = (a - std::sqrt(2.0 * a)) / (2.0 * kappa);
  const double r = (1.0 + b * b) / (2.0 * b);
  for (;;) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    const double z = std::cos(std::numbers::pi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double theta = std::acos(std::clamp(f, -1.0, 1.0));
      return rng.uniform() < 0.5 ? -theta : theta;
    }
  }
}

double wrap_hours(double h) {
  h = std::fmod(h, 24.0);
  if (h < 0.0) h += 24.0;
  if (h >= 24.0) h = 0.0;
  return h;
}

struct ClusterAt {
  double lon;
  double lat;
  double sd_lon;
  double sd_lat;
};

ClusterAt cluster_at(const SyntheticCluster& c, double week_offset) {
  const LonLatScale s = lonlat_scale(c.lat);
  ClusterAt at;
  at.lon = c.lon + c.drift_lon_km * week_offset / s.km_per_deg_lon;
  at.lat = c.lat + c.drift_lat_km * week_offset / s.km_per_deg_lat;
  at.sd_lon = c.sd_km / s.km_per_deg_lon;
  at.sd_lat = c.sd_km / s.km_per_deg_lat;
  return at;
}

double window_density_with(const SyntheticDataset& data, double lon, double lat, const TimeWindow& window,
                           Date week, const std::vector<double>& mass) {
  const SyntheticSpec& spec = data.spec;
  const double offset = static_cast<double>((week - spec.start).count()) / 7.0;
  double total_w = 0.0;
  for (const auto& c : data.clusters) total_w += c.weight;
  double f = 0.0;
  for (std::size_t k = 0; k < data.clusters.size(); ++k) {
    const SyntheticCluster& c = data.clusters[k];
    const ClusterAt at = cluster_at(c, offset);
    const double g = gaussian_kernel((lon - at.lon) / at.sd_lon) / at.sd_lon *
                     gaussian_kernel((lat - at.lat) / at.sd_lat) / at.sd_lat;
    f += c.weight / total_w * g * mass[k];
  }
  const double area = (spec.bbox.lon_max - spec.bbox.lon_min) * (spec.bbox.lat_max - spec.bbox.lat_min);
  return (1.0 - spec.background_share) * f +
         spec.background_share * (window.t2 - window.t1) / (area * 24.0);
}

}  // namespace

Date SyntheticDataset::week_start(int k) const { return spec.start + std::chrono::days{7 * k}; }

double SyntheticDataset::density(double lon, double lat, double hours, Date week) const {
  const double offset = static_cast<double>((week - spec.start).count()) / 7.0;
  double total_w = 0.0;
  for (const auto& c : clusters) total_w += c.weight;
  double f = 0.0;
  for (const auto& c : clusters) {
    const ClusterAt at = cluster_at(c, offset);
    const double g = gaussian_kernel((lon - at.lon) / at.sd_lon) / at.sd_lon *
                     gaussian_kernel((lat - at.lat) / at.sd_lat) / at.sd_lat;
    f += c.weight / total_w * g * von_mises_density(hours - c.peak_hour, c.tau);
  }
  const double area = (spec.bbox.lon_max - spec.bbox.lon_min) * (spec.bbox.lat_max - spec.bbox.lat_min);
  return (1.0 - spec.background_share) * f + spec.background_share / (area * 24.0);
}

double SyntheticDataset::window_density(double lon, double lat, const TimeWindow& window, Date week) const {
  std::vector<double> mass;
  mass.reserve(clusters.size());
  for (const auto& c : clusters) mass.push_back(von_mises_interval_mass(c.peak_hour, window.t1, window.t2, c.tau));
  return window_density_with(*this, lon, lat, window, week, mass);
}

SyntheticDataset generate_synthetic_events(const SyntheticSpec& spec) {
  if (!spec.bbox.valid()) throw ArgumentError("synthetic: invalid bbox");
  if (!(spec.events_per_week > 0.0)) throw ArgumentError("synthetic: rate must be positive");
  if (spec.weeks < 1) throw ArgumentError("synthetic: need at least one week");
  if (!(spec.background_share >= 0.0 && spec.background_share <= 1.0)) {
    throw ArgumentError("synthetic: background share outside [0, 1]");
  }
  SyntheticDataset data;
  data.spec = spec;
  const BBox& bb = spec.bbox;
  const double lon_span = bb.lon_max - bb.lon_min;
  const double lat_span = bb.lat_max - bb.lat_min;
  if (!spec.explicit_clusters.empty()) {
    data.clusters = spec.explicit_clusters;
  } else {
    if (spec.clusters < 1 && spec.background_share < 1.0) throw ArgumentError("synthetic: no clusters");
    Rng rng = Rng::stream({spec.seed, 0xC1ULL});
    for (int k = 0; k < spec.clusters; ++k) {
      SyntheticCluster c;
      c.lon = bb.lon_min + lon_span * (0.1 + 0.8 * rng.uniform());
      c.lat = bb.lat_min + lat_span * (0.1 + 0.8 * rng.uniform());
      c.sd_km = spec.sd_km_min + (spec.sd_km_max - spec.sd_km_min) * rng.uniform();
      c.weight = -std::log(1.0 - rng.uniform());
      c.peak_hour = 24.0 * rng.uniform();
      c.tau = spec.tau_min + (spec.tau_max - spec.tau_min) * rng.uniform();
      const double dir = 2.0 * std::numbers::pi * rng.uniform();
      c.drift_lon_km = spec.drift_km_per_week * std::cos(dir);
      c.drift_lat_km = spec.drift_km_per_week * std::sin(dir);
      data.clusters.push_back(c);
    }
  }
  double total_w = 0.0;
  for (const auto& c : data.clusters) total_w += c.weight;

  for (int w = 0; w < spec.weeks; ++w) {
    Rng rng = Rng::stream({spec.seed, 0xE7ULL, static_cast<std::uint64_t>(w)});
    std::poisson_distribution<int> count(spec.events_per_week);
    const int n = count(rng);
    const Date start = data.week_start(w);
    for (int i = 0; i < n; ++i) {
      EventRecord e;
      e.event_id = "S" + std::to_string(w) + "-" + std::to_string(i);
      e.date = start + std::chrono::days{static_cast<int>(rng.uniform() * 7.0)};
      if (data.clusters.empty() || rng.uniform() < spec.background_share) {
        e.lon = bb.lon_min + lon_span * rng.uniform();
        e.lat = bb.lat_min + lat_span * rng.uniform();
        e.time_of_day = wrap_hours(24.0 * rng.uniform());
      } else {
        double u = rng.uniform() * total_w;
        std::size_t k = 0;
        while (k + 1 < data.clusters.size() && u >= data.clusters[k].weight) {
          u -= data.clusters[k].weight;
          ++k;
        }
        const SyntheticCluster& c = data.clusters[k];
        const ClusterAt at = cluster_at(c, static_cast<double>(w));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int attempt = 0; attempt < 64; ++attempt) {
          e.lon = at.lon + at.sd_lon * normal(rng);
          e.lat = at.lat + at.sd_lat * normal(rng);
          if (bb.contains(e.lon, e.lat)) break;
        }
        e.lon = std::clamp(e.lon, bb.lon_min, bb.lon_max);
        e.lat = std::clamp(e.lat, bb.lat_min, bb.lat_max);
        e.time_of_day = wrap_hours(c.peak_hour + sample_von_mises_angle(c.tau, rng) * 12.0 / std::numbers::pi);
      }
      data.events.push_back(std::move(e));
    }
  }
  return data;
}

HotspotGrid ground_truth_map(const SyntheticDataset& data, std::shared_ptr<const SpatialGrid> grid,
                             Date week, const TimeWindow& window) {
  if (!grid) throw ArgumentError("ground_truth_map: no grid");
  const std::size_t n = grid->cell_count();
  std::vector<double> log_d(n);
  std::vector<double> mass;
  for (const auto& c : data.clusters) mass.push_back(von_mises_interval_mass(c.peak_hour, window.t1, window.t2, c.tau));
  parallel_for(n, [&](std::size_t c) {
    const GeoPoint p = grid->center(static_cast<int>(c));
    log_d[c] = std::log(window_density_with(data, p.lon, p.lat, window, week, mass));
  });
  HotspotGrid out = classify_cells(std::move(grid), std::move(log_d));
  out.week = format_date(week);
  out.window = window;
  return out;
}

}  // namespace hotspot
