// Acceptance run: one PASS / FAIL / SKIP line per criterion on stdout,
// diagnostics on stderr. Exit status 1 when any criterion fails.
//
//   hotspot_acceptance [criterion ...]
//
// Set HOTSPOT_KAGGLE_CSV to the Delhi street-crime export to enable the
// regression against the published numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hotspot/digest.hpp"
#include "hotspot/diagnostics.hpp"
#include "hotspot/evaluation.hpp"
#include "hotspot/forecast.hpp"
#include "hotspot/inference.hpp"
#include "hotspot/kernels.hpp"
#include "hotspot/parallel.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace hotspot;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
  Verdict verdict = Verdict::fail;
  std::string detail;
};

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), format, a, b, c, d);
  return buf;
}

void note(const std::string& s) { std::fprintf(stderr, "  %s\n", s.c_str()); }

Outcome verdict(bool ok, std::string detail) { return {ok ? Verdict::pass : Verdict::fail, std::move(detail)}; }

// --- kernels ----------------------------------------------------------------

Outcome kernel_numerics() {
  double worst_i0 = 0.0;
  for (int k = 0; k <= 5000; ++k) {
    const double x = 0.01 * k;
    const double expect = oracle::series_log_i0(x);
    const double rel = std::abs(log_bessel_i0(x) - expect) / std::max(1.0, std::abs(expect));
    worst_i0 = std::max(worst_i0, rel);
  }
  double worst_gauss = 0.0;
  for (double scale : {1.0, 0.3, 4.0}) {
    double s = 0.0;
    const double dx = 1e-3 * scale;
    for (double u = -14.0 * scale; u < 14.0 * scale; u += dx) s += gaussian_kernel((u + 0.5 * dx) / scale) / scale * dx;
    worst_gauss = std::max(worst_gauss, std::abs(s - 1.0));
  }
  double worst_vm = 0.0;
  for (double tau : {0.0, 0.05, 0.5, 2.0, 10.0, 100.0, 1000.0}) {
    const int steps = 40000;
    double s = 0.0;
    for (int k = 0; k < steps; ++k) s += von_mises_density(24.0 * (k + 0.5) / steps - 12.0, tau) * 24.0 / steps;
    worst_vm = std::max(worst_vm, std::abs(s - 1.0));
  }
  double worst_partition = 0.0;
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 24.0);
  std::uniform_int_distribution<int> pieces(1, 12);
  for (int rep = 0; rep < 2000; ++rep) {
    std::vector<double> cuts{0.0, 24.0};
    for (int k = pieces(gen); k > 0; --k) cuts.push_back(u(gen));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const double tau = std::exp(std::uniform_real_distribution<double>(-4.0, 9.0)(gen));
    const double center = u(gen);
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) s += von_mises_interval_mass(center, cuts[k], cuts[k + 1], tau);
    worst_partition = std::max(worst_partition, std::abs(s - 1.0));
  }
  const bool ok = worst_i0 <= 1e-9 && worst_gauss <= 1e-7 && worst_vm <= 1e-7 && worst_partition <= 1e-7;
  return verdict(ok, fmt("log I0 rel err %.2e; Gaussian norm err %.2e; von Mises norm err %.2e; partition err %.2e",
                         worst_i0, worst_gauss, worst_vm, worst_partition));
}

// --- Gibbs ------------------------------------------------------------------

Outcome gibbs_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;

  const GibbsData d = fixtures::small_data(1);
  GibbsSampler s(d, GibbsOptions{});
  const GibbsState st = fixtures::some_state(d, 2);
  s.set_state(st);
  const fixtures::Assigned a = fixtures::assigned(d, st);
  double worst_z = 0.0;
  for (int dim : {1, 2}) {
    const double beta = dim == 1 ? st.params.beta1 : st.params.beta2;
    const double rate = s.alpha_rate(dim, beta);
    const double shape = s.alpha_shape();
    Rng rng = Rng::stream({99, static_cast<std::uint64_t>(dim)});
    const int n = 100000;
    double m1 = 0.0;
    double m2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double v = std::pow(s.sample_alpha_spatial(dim, rng), 2);
      m1 += v;
      m2 += v * v;
    }
    m1 /= n;
    const double var = m2 / n - m1 * m1;
    const double var_true = shape / (rate * rate);
    const double z_mean = std::abs(m1 - shape / rate) / std::sqrt(var_true / n);
    const double z_var = std::abs(var - var_true) / (var_true * std::sqrt((2.0 + 6.0 / shape) / n));
    worst_z = std::max({worst_z, z_mean, z_var});
  }
  ok &= worst_z <= 3.0;
  note(fmt("alpha^2 moments: worst |z| = %.2f over 1e5 draws", worst_z));

  double worst_tv = 0.0;
  std::size_t mismatches = 0;
  const auto grids = PriorGrids::standard();
  for (int dim : {1, 2, 3}) {
    std::vector<double> log_w;
    if (dim == 3) {
      log_w = oracle::time_conditional(grids.beta, st.params.alpha3, true, a.dt, a.la);
    } else {
      const double alpha = dim == 1 ? st.params.alpha1 : st.params.alpha2;
      log_w = oracle::beta_spatial_conditional(grids.beta, alpha, dim == 1 ? a.d1 : a.d2, a.la);
    }
    const auto c = oracle::check_grid_sampler(
        log_w, [&](Rng& r) { return s.sample_beta_grid(dim, r); }, grids.beta, 10 + static_cast<std::uint64_t>(dim),
        5000, 2000000);
    worst_tv = std::max(worst_tv, c.tv);
    mismatches += c.mismatches;
  }
  {
    const auto log_w = oracle::time_conditional(grids.alpha3, st.params.beta3, false, a.dt, a.la);
    const auto c = oracle::check_grid_sampler(log_w, [&](Rng& r) { return s.sample_alpha3_grid(r); }, grids.alpha3,
                                              14, 5000, 2000000);
    worst_tv = std::max(worst_tv, c.tv);
    mismatches += c.mismatches;
  }
  ok &= worst_tv < 0.01 && mismatches == 0;
  note(fmt("grid samplers: worst TV %.4f over 2e6 draws, %.0f paired mismatches", worst_tv,
           static_cast<double>(mismatches)));

  const auto inst = oracle::micro_instance();
  const auto exact = oracle::brute_force_beta1_slot(inst);
  const auto counts = fixtures::micro_gibbs_counts(inst, 400000, 2000, 2024);
  const double micro_tv = oracle::total_variation(oracle::normalized(counts), exact);
  ok &= micro_tv < 0.05;

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok &= secs < 600.0;
  return verdict(ok, fmt("alpha^2 worst |z| %.2f; grid TV %.4f; micro-instance TV %.4f; %.0f s", worst_z, worst_tv,
                         micro_tv, secs) +
                         (mismatches ? " (sampler disagrees with direct categorical draws)" : ""));
}

// --- normalization ----------------------------------------------------------

Outcome normalization() {
  SyntheticSpec spec;
  spec.bbox = {77.18, 28.58, 77.22, 28.62};
  spec.clusters = 4;
  spec.weeks = 4;
  spec.events_per_week = 45.0;
  spec.sd_km_min = 0.2;
  spec.sd_km_max = 0.5;
  spec.background_share = 0.0;
  spec.seed = 5;
  const auto data = generate_synthetic_events(spec);
  FitConfig fc;
  fc.schedule = {40, 40};
  const FittedModel model = fit(block_by_week(data.events, 3, data.week_start(3)), fc);
  ForecastOptions fo;
  fo.eval.fast_eval = true;
  const ForecastInput in = ForecastInput::from_model(model, block_by_week(data.events, 3, data.week_start(4)), fo);
  const auto& pts = in.points();
  const auto& bw = in.density().bandwidths();
  if (pts.size() > 200) return {Verdict::fail, "instance has more than 200 points"};

  double h_min = 1e9, h_max = 0.0, x0 = 1e9, x1 = -1e9, y0 = 1e9, y1 = -1e9, tau_max = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    h_min = std::min({h_min, bw.h1[k], bw.h2[k]});
    h_max = std::max({h_max, bw.h1[k], bw.h2[k]});
    x0 = std::min(x0, pts.lon[k]);
    x1 = std::max(x1, pts.lon[k]);
    y0 = std::min(y0, pts.lat[k]);
    y1 = std::max(y1, pts.lat[k]);
    tau_max = std::max(tau_max, bw.tau[k]);
  }
  const double pad = 9.0 * h_max;
  x0 -= pad;
  x1 += pad;
  y0 -= pad;
  y1 += pad;
  const double step = 0.5 * h_min;
  const int nx = static_cast<int>(std::ceil((x1 - x0) / step));
  const int ny = static_cast<int>(std::ceil((y1 - y0) / step));
  // The time integrand is periodic and analytic, so the midpoint rule converges
  // geometrically; 32 nodes plus a margin for sharp profiles is ample.
  const int nt = 32 + static_cast<int>(std::ceil(4.0 * tau_max));
  note(fmt("normalization instance: %.0f points, %.0f x %.0f spatial nodes, %.0f time nodes",
           static_cast<double>(pts.size()), nx, ny, nt));

  std::vector<double> rows(static_cast<std::size_t>(nx), 0.0);
  parallel_for(rows.size(), [&](std::size_t i) {
    double s = 0.0;
    const double x = x0 + (static_cast<double>(i) + 0.5) * step;
    for (int j = 0; j < ny; ++j) {
      const double y = y0 + (j + 0.5) * step;
      for (int k = 0; k < nt; ++k) s += predictive_density_point(in, x, y, 24.0 * (k + 0.5) / nt);
    }
    rows[i] = s;
  });
  const double total = std::accumulate(rows.begin(), rows.end(), 0.0) * step * step * 24.0 / nt;

  std::vector<TimeWindow> windows(canonical_windows().begin(), canonical_windows().end());
  windows.push_back({20.0, 24.0});
  windows.push_back({7.5, 9.25});
  windows.push_back(kWholeDay);
  double worst_window = 0.0;
  for (const auto& w : windows) {
    const IntervalDensity f(in, w);
    std::vector<double> col(static_cast<std::size_t>(nx), 0.0);
    parallel_for(col.size(), [&](std::size_t i) {
      const double x = x0 + (static_cast<double>(i) + 0.5) * step;
      double s = 0.0;
      for (int j = 0; j < ny; ++j) s += f.value(x, y0 + (j + 0.5) * step);
      col[i] = s;
    });
    worst_window = std::max(worst_window, std::abs(std::accumulate(col.begin(), col.end(), 0.0) * step * step - 1.0));
  }
  return verdict(std::abs(total - 1.0) <= 1e-3 && worst_window <= 1e-3,
                 fmt("space-time integral %.6f; worst per-window spatial error %.2e over %.0f windows", total,
                     worst_window, static_cast<double>(windows.size())));
}

// --- metrics ----------------------------------------------------------------

Outcome metric_identities() {
  std::mt19937_64 gen(23);
  std::normal_distribution<double> z;
  double worst_pai = 0.0;
  double worst_diag = 0.0;
  double worst_row = 0.0;
  const auto grid = std::make_shared<SpatialGrid>(build_grid({77.1, 28.5, 77.3, 28.7}, 1000.0));
  const std::size_t n = grid->cell_count();
  std::vector<HotspotGrid> maps;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> ld(n);
    for (auto& v : ld) v = z(gen);
    maps.push_back(classify_cells(grid, ld));
    std::vector<std::size_t> counts(n);
    for (auto& c : counts) c = gen() % 4 == 0 ? gen() % 6 : 0;
    counts[0] += 1;
    const auto curve = event_area_curve_from_ranking(maps.back().order, counts);
    for (int k = 1; k <= 100; ++k) {
      worst_pai = std::max(worst_pai, std::abs(*pai(curve, k) * k / 100.0 - *capture_at_topk(curve, k)));
    }
    const std::vector<std::size_t> flat(n, 1 + static_cast<std::size_t>(rep));
    worst_diag = std::max(worst_diag, std::abs(*auc(event_area_curve_from_ranking(maps.back().order, flat)) - 0.5));
  }
  for (std::size_t k = 1; k < maps.size(); ++k) {
    for (const auto& row : transition_matrix(maps[k - 1], maps[k])) {
      worst_row = std::max(worst_row, std::abs(row[0] + row[1] + row[2] - 1.0));
    }
  }
  std::vector<std::size_t> counts(n);
  for (auto& c : counts) c = gen() % 5 == 0 ? 1 + gen() % 8 : 0;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  double random_mean = 0.0;
  for (int s = 0; s < 200; ++s) {
    std::shuffle(order.begin(), order.end(), gen);
    random_mean += *auc(event_area_curve_from_ranking(order, counts));
  }
  random_mean /= 200.0;
  const bool ok = worst_pai <= 1e-12 && worst_diag <= 1e-12 && std::abs(random_mean - 0.5) <= 0.02 && worst_row <= 1e-12;
  return verdict(ok, fmt("PAI identity err %.1e; diagonal AUC err %.1e; random AUC %.4f; transition row err %.1e",
                         worst_pai, worst_diag, random_mean, worst_row));
}

// --- synthetic backtests ------------------------------------------------------

struct SyntheticWorld {
  SyntheticDataset data;
  std::shared_ptr<const SpatialGrid> grid;
  ModelRunConfig run;
  int history = 12;
};

const SyntheticWorld& synthetic_world() {
  static const SyntheticWorld w = [] {
    SyntheticWorld s;
    SyntheticSpec spec;
    spec.seed = 7;
    spec.weeks = 34;
    s.data = generate_synthetic_events(spec);
    s.grid = std::make_shared<SpatialGrid>(build_grid(spec.bbox, 200.0));
    s.run.fit.schedule = {50, 50};
    s.run.forecast.eval.fast_eval = true;
    return s;
  }();
  return w;
}

std::vector<Date> replicate_weeks(const SyntheticWorld& w, int first, int count) {
  std::vector<Date> out;
  for (int k = 0; k < count; ++k) out.push_back(w.data.week_start(first + k));
  return out;
}

Outcome model_ordering() {
  const auto& w = synthetic_world();
  BacktestConfig cfg;
  cfg.run = w.run;
  cfg.models = {1, 4, 5};
  cfg.history_weeks = w.history;
  cfg.windows.assign(canonical_windows().begin(), canonical_windows().end());
  cfg.weeks = replicate_weeks(w, w.history + 1, 20);
  const auto result = backtest(w.data.events, w.grid, cfg);
  if (!result.failures.empty()) return {Verdict::fail, "backtest failures: " + result.failures.front().reason};

  std::map<std::string, std::map<int, std::pair<double, int>>> per_week;
  for (const auto& r : result.rows) {
    if (!r.auc) continue;
    auto& cell = per_week[r.week][r.model];
    cell.first += *r.auc;
    cell.second += 1;
  }
  int ordered = 0;
  double gap = 0.0;
  double m1 = 0.0, m4 = 0.0, m5 = 0.0;
  for (const auto& [week, by_model] : per_week) {
    const double a1 = by_model.at(1).first / by_model.at(1).second;
    const double a4 = by_model.at(4).first / by_model.at(4).second;
    const double a5 = by_model.at(5).first / by_model.at(5).second;
    ordered += a5 >= a4 && a4 >= a1;
    gap += a5 - a1;
    m1 += a1;
    m4 += a4;
    m5 += a5;
    note(week + fmt(": M1 %.4f  M4 %.4f  M5 %.4f", a1, a4, a5));
  }
  const double weeks = static_cast<double>(per_week.size());
  gap /= weeks;
  const double share = ordered / weeks;
  return verdict(per_week.size() == 20 && share >= 0.8 && gap >= 0.05,
                 fmt("M5>=M4>=M1 in %.0f%% of 20 weeks; mean AUC M1 %.4f M4 %.4f M5 %.4f", 100.0 * share, m1 / weeks,
                     m4 / weeks, m5 / weeks) +
                     fmt("; M5-M1 gap %.4f", gap));
}

Outcome intel_value() {
  const auto& w = synthetic_world();
  BacktestConfig cfg;
  cfg.run = w.run;
  cfg.models = {5};
  cfg.history_weeks = w.history;
  cfg.windows.assign(canonical_windows().begin(), canonical_windows().end());
  cfg.weeks = replicate_weeks(w, w.history + 1, 8);
  cfg.intel = {{0.5, 100.0}, {0.1, 1000.0}};
  cfg.intel_seeds = 10;
  const auto result = backtest(w.data.events, w.grid, cfg);
  if (!result.failures.empty()) return {Verdict::fail, "backtest failures: " + result.failures.front().reason};
  const auto strong = intel_improvement_percent(result.summary, 5, cfg.intel[0].label());
  const auto weak = intel_improvement_percent(result.summary, 5, cfg.intel[1].label());
  if (!strong || !weak) return {Verdict::fail, "no intel summary rows"};
  return verdict(*strong >= 1.0 && *strong <= 8.0 && *weak >= -1.5 && *weak <= 1.5,
                 fmt("p=0.5,d=100: %+.2f%%; p=0.1,d=1000: %+.2f%% (8 weeks, 10 seeds)", *strong, *weak));
}

// --- Kaggle regression --------------------------------------------------------

Outcome kaggle_regression() {
  const char* path = std::getenv("HOTSPOT_KAGGLE_CSV");
  if (path == nullptr || *path == '\0') return {Verdict::skip, "HOTSPOT_KAGGLE_CSV not set"};
  ParsedEvents parsed;
  try {
    parsed = parse_events_csv(std::string(path));
  } catch (const std::exception& e) {
    return {Verdict::skip, std::string("dataset unreadable: ") + e.what()};
  }
  const auto& ev = parsed.events;
  if (ev.empty()) return {Verdict::skip, "dataset holds no events"};
  BBox box{ev[0].lon, ev[0].lat, ev[0].lon, ev[0].lat};
  for (const auto& e : ev) {
    box.lon_min = std::min(box.lon_min, e.lon);
    box.lon_max = std::max(box.lon_max, e.lon);
    box.lat_min = std::min(box.lat_min, e.lat);
    box.lat_max = std::max(box.lat_max, e.lat);
  }
  const auto grid = std::make_shared<SpatialGrid>(build_grid(box, 200.0));
  int weeks = 4;
  if (const char* n = std::getenv("HOTSPOT_KAGGLE_WEEKS")) weeks = std::clamp(std::atoi(n), 4, 25);
  BacktestConfig cfg;
  cfg.models = {5};
  cfg.windows.assign(canonical_windows().begin(), canonical_windows().end());
  const Date first{std::chrono::year{2020} / 10 / 4};
  for (int k = 0; k < weeks; ++k) cfg.weeks.push_back(first + std::chrono::days{7 * k});

  std::vector<TransitionMatrix> transitions;
  std::vector<HotspotGrid> previous;
  std::vector<MetricRow> rows;
  for (const Date week : cfg.weeks) {
    const ModelRun run = run_model(ModelSpec::standard(5), ev, week, cfg.windows, grid, cfg.run);
    const auto actual = events_between(ev, week, week + std::chrono::days{7});
    for (const auto& g : run.grids) rows.push_back(score_map(g, actual));
    for (std::size_t k = 0; k < previous.size(); ++k) transitions.push_back(transition_matrix(previous[k], run.grids[k]));
    previous = run.grids;
  }
  const auto summary = summarize_rows(rows);
  double overall = 0.0;
  double cap_night = 0.0;
  for (const auto& s : summary) {
    if (s.window == "all") overall = s.auc_mean;
    if (s.window == "20-24") cap_night = s.capture20_mean;
  }
  const double red_red = transitions.empty() ? 0.0 : average_transitions(transitions)[0][0];
  return verdict(std::abs(overall - 0.909) <= 0.04 && std::abs(cap_night - 0.764) <= 0.06 &&
                     std::abs(red_red - 0.8958) <= 0.05,
                 fmt("mean AUC %.4f (0.909); capture@20 20-24 %.4f (0.764); red->red %.4f (0.8958)", overall,
                     cap_night, red_red));
}

// --- determinism --------------------------------------------------------------

std::string pipeline_digest() {
  SyntheticSpec spec;
  spec.clusters = 10;
  spec.weeks = 8;
  spec.events_per_week = 60.0;
  spec.seed = 31;
  const auto data = generate_synthetic_events(spec);
  const auto grid = std::make_shared<SpatialGrid>(build_grid(spec.bbox, 300.0));
  std::ostringstream out;

  FitConfig fc;
  fc.schedule = {30, 30};
  fc.chains = 2;
  fc.seed = 9;
  const Date week = data.week_start(6);
  const FittedModel model = fit(block_by_week(data.events, 4, week - std::chrono::days{7}), fc);
  write_trace_csv(out, model.adaptive.chains);
  const BlockedDataset prediction = block_by_week(data.events, 4, week);
  const ForecastInput in = ForecastInput::from_model(model, prediction);
  for (const auto& w : canonical_windows()) {
    HotspotGrid g = evaluate_grid(in, grid, w);
    write_forecast_csv(out, g);
    write_forecast_geojson(out, g);
  }
  write_forecast_csv(out, evaluate_grid_posterior(model, prediction, grid, {18.0, 24.0}, 5));

  BacktestConfig cfg;
  cfg.run.fit.schedule = {20, 20};
  cfg.models = {1, 3, 4, 5};
  cfg.history_weeks = 4;
  cfg.windows = {{0.0, 12.0}, {12.0, 24.0}};
  cfg.weeks = {data.week_start(6), data.week_start(7)};
  cfg.intel = {{0.5, 100.0}};
  cfg.intel_seeds = 2;
  const auto bt = backtest(data.events, grid, cfg);
  write_metric_rows_csv(out, bt.rows);
  return sha256_hex(out.str());
}

Outcome determinism() {
  std::vector<std::string> digests;
  std::string detail;
  for (int threads : {1, 4, 2, 1}) {
    set_threads(threads);
    digests.push_back(pipeline_digest());
    detail += (detail.empty() ? "" : ", ") + std::to_string(threads) + " thread(s) " + digests.back().substr(0, 12);
  }
  set_threads(1);
  const bool ok = std::all_of(digests.begin(), digests.end(), [&](const std::string& d) { return d == digests[0]; });
  if (max_threads() < 1) return {Verdict::fail, "no threads"};
  return verdict(ok, "artifact digests: " + detail);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"kernel_numerics", kernel_numerics},     {"gibbs_correctness", gibbs_correctness},
      {"normalization", normalization},         {"metric_identities", metric_identities},
      {"model_ordering", model_ordering},       {"intel_value", intel_value},
      {"kaggle_regression", kaggle_regression}, {"determinism", determinism},
  };
  std::vector<std::string> selected(argv + 1, argv + argc);
  for (const auto& name : selected) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == name; })) {
      std::fprintf(stderr, "unknown criterion '%s'\n", name.c_str());
      return 2;
    }
  }
  set_diagnostic_sink([](const std::string& m) { std::fprintf(stderr, "  warning: %s\n", m.c_str()); });
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), name) == selected.end()) continue;
    std::fprintf(stderr, "[%s]\n", name.c_str());
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::skip ? "SKIP" : "FAIL";
    failures += o.verdict == Verdict::fail;
    std::printf("%s %s: %s [%.1f s]\n", tag, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
