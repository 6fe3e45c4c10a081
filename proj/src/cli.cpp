#include "hotspot/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hotspot/artifacts.hpp"
#include "hotspot/csv.hpp"
#include "hotspot/digest.hpp"
#include "hotspot/errors.hpp"
#include "hotspot/parallel.hpp"
#include "hotspot/service.hpp"
#include "hotspot/workspace.hpp"

namespace hotspot {
namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config;
  std::string events;
  std::string dataset;
  std::string store;
  int threads = 0;
};

Date date_arg(const std::string& text, const std::string& flag) {
  const auto d = parse_date(text);
  if (!d) throw ArgumentError(flag + " must be YYYY-MM-DD, got '" + text + "'");
  return *d;
}

RunConfig load_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : RunConfig::load(c.config);
  if (!c.events.empty()) {
    cfg.events_csv = c.events;
    cfg.dataset_id.clear();
  }
  if (!c.dataset.empty()) {
    cfg.dataset_id = c.dataset;
    cfg.events_csv.clear();
  }
  if (!c.store.empty()) cfg.store = c.store;
  if (c.threads > 0) cfg.threads = c.threads;
  if (cfg.events_csv.empty() && cfg.dataset_id.empty()) {
    throw ArgumentError("no data: pass --config, --events or --dataset");
  }
  if (cfg.threads > 0) set_threads(cfg.threads);
  return cfg;
}

std::string store_root(const Common& c) {
  if (!c.store.empty()) return c.store;
  if (!c.config.empty()) return resolve_store_root(RunConfig::load(c.config).store);
  return resolve_store_root("");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ArgumentError("cannot write " + path);
  f << text;
}

std::vector<IntelPoint> intel_arg(const Workspace& ws, const std::string& value) {
  if (fs::is_regular_file(value)) return read_intel_csv(value);
  return ws.load_intel(value);
}

// The last `count` weeks holding events, up to `end` when given.
std::vector<Date> recent_weeks(const Workspace& ws, int count, const std::string& end) {
  if (count < 1) throw ArgumentError("--weeks must be positive");
  std::vector<Date> weeks = ws.weeks();
  if (!end.empty()) {
    const Date last = date_arg(end, "--end");
    std::erase_if(weeks, [&](Date d) { return d > last; });
  }
  if (weeks.size() > static_cast<std::size_t>(count)) weeks.erase(weeks.begin(), weeks.end() - count);
  if (weeks.empty()) throw ArgumentError("no weeks with events to evaluate");
  return weeks;
}

Manifest csv_manifest(const Workspace& ws) {
  return {{"config_hash", ws.config_hash()}, {"dataset", ws.dataset_entry().id}, {"config", ws.config_entry().id}};
}

std::string format_opt(const std::optional<double>& v) {
  if (!v) return "NA";
  std::ostringstream s;
  s.precision(4);
  s << std::fixed << *v;
  return s.str();
}

std::string forecast_text(const HotspotGrid& h, const std::string& format) {
  std::ostringstream s;
  if (format == "csv") {
    write_forecast_csv(s, h);
  } else {
    write_forecast_geojson(s, h);
  }
  return s.str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatio-temporal crime hotspot forecasting", "hotspot"};
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);
  Common common;
  app.add_option("--config", common.config, "Run configuration (JSON)");
  app.add_option("--events", common.events, "Events CSV (overrides the config)");
  app.add_option("--dataset", common.dataset, "Stored dataset id (overrides the config)");
  app.add_option("--store", common.store, "Store root (default: $HOTSPOT_STORE or ./hotspot-store)");
  app.add_option("--threads", common.threads, "Worker threads for density evaluation")->check(CLI::NonNegativeNumber);

  auto emit = [&](const StoreEntry& e) { out << e.manifest_line() << '\n'; };

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse and clean an events CSV into the store");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset into the store");
  SyntheticSpec sspec;
  std::vector<double> sbbox;
  std::string sstart, scsv;
  synth->add_option("--weeks", sspec.weeks, "Weeks of data")->capture_default_str();
  synth->add_option("--clusters", sspec.clusters, "Number of clusters")->capture_default_str();
  synth->add_option("--events-per-week", sspec.events_per_week, "Mean events per week")->capture_default_str();
  synth->add_option("--background", sspec.background_share, "Share of uniform background events")->capture_default_str();
  synth->add_option("--drift", sspec.drift_km_per_week, "Cluster drift, km per week")->capture_default_str();
  synth->add_option("--seed", sspec.seed, "Random seed")->capture_default_str();
  synth->add_option("--start", sstart, "First week (YYYY-MM-DD, a Sunday)");
  synth->add_option("--bbox", sbbox, "lon_min,lat_min,lon_max,lat_max")->delimiter(',')->expected(4);
  synth->add_option("--csv", scsv, "Also write the events to this CSV");

  // fit
  auto* fitc = app.add_subcommand("fit", "Fit a model on one training week");
  std::string fweek, fwindow, fintel, fsummary;
  int fmodel = 0, fchains = 0;
  int fwarmup = -1, fsamples = -1;
  std::uint64_t fseed = 0;
  fitc->add_option("--week", fweek, "Training week start (YYYY-MM-DD)");
  fitc->add_option("--window", fwindow, "Window for the spatial-only models 1 and 4 (e.g. 20-24)");
  fitc->add_option("--model", fmodel, "Model 1-5 (default: config)")->check(CLI::Range(1, 5));
  fitc->add_option("--warmup", fwarmup, "Warm-up sweeps")->check(CLI::NonNegativeNumber);
  fitc->add_option("--samples", fsamples, "Kept sweeps")->check(CLI::PositiveNumber);
  fitc->add_option("--chains", fchains, "Chains")->check(CLI::PositiveNumber);
  fitc->add_option("--seed", fseed, "Sampler seed");
  fitc->add_option("--intel", fintel, "Intel for the training week: stored id or CSV");
  fitc->add_option("--summary", fsummary, "Write the posterior summary CSV here");

  // forecast
  auto* fc = app.add_subcommand("forecast", "Hotspot map for a forecast week");
  std::string cmodel, cweek, cintel, cformat = "geojson", coutput, cdir = ".";
  std::vector<std::string> cwindows;
  fc->add_option("--model", cmodel, "Stored model id (default: fit as the config says)");
  fc->add_option("--week", cweek, "Forecast week start (default: the week after the model's training week)");
  fc->add_option("--window", cwindows, "Time window(s), e.g. 20-24 (default: configured windows)");
  fc->add_option("--out", cformat, "Output format")->check(CLI::IsMember({"geojson", "csv"}))->capture_default_str();
  fc->add_option("--output", coutput, "Output file for a single window ('-' for stdout)");
  fc->add_option("--output-dir", cdir, "Directory for per-window files")->capture_default_str();
  fc->add_option("--intel", cintel, "Intel for the forecast week: stored id or CSV");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score stored forecasts against the events of their week");
  std::vector<std::string> eids;
  std::string ecurve;
  ev->add_option("--forecast", eids, "Forecast id(s)")->required();
  ev->add_option("--curve", ecurve, "Write the event-area curve CSV of the first forecast here");

  // backtest
  auto* bt = app.add_subcommand("backtest", "Rolling comparison of models over recent weeks");
  std::vector<int> bmodels{1, 2, 3, 4, 5};
  int bweeks = 25;
  std::string bend, bdir = ".";
  std::vector<std::string> bintel;
  bt->add_option("--models", bmodels, "Models to compare")->delimiter(',')->check(CLI::Range(1, 5));
  bt->add_option("--weeks", bweeks, "Number of forecast weeks")->capture_default_str();
  bt->add_option("--end", bend, "Last forecast week (default: last week with events)");
  bt->add_option("--intel", bintel, "Simulated intel settings for Model 5, as p:d (e.g. 0.5:100)");
  bt->add_option("--out-dir", bdir, "Directory for backtest-rows.csv and backtest-summary.csv")->capture_default_str();

  // simulate-intel
  auto* si = app.add_subcommand("simulate-intel", "Simulated analyst intel from a week's events");
  std::string sweek, soutput;
  std::optional<double> sp, sd;
  std::optional<std::uint64_t> sseed;
  si->add_option("--week", sweek, "Week whose events are perturbed")->required();
  si->add_option("--p", sp, "Proportion of events reported");
  si->add_option("--d", sd, "Displacement radius in metres");
  si->add_option("--seed", sseed, "Random seed");
  si->add_option("--output", soutput, "Also write the intel CSV here");

  // diff
  auto* df = app.add_subcommand("diff", "Blue/green change map between two forecasts");
  std::string da, db, doutput;
  df->add_option("--a", da, "Earlier forecast id")->required();
  df->add_option("--b", db, "Later forecast id")->required();
  df->add_option("--output", doutput, "GeoJSON output file");

  // staleness
  auto* st = app.add_subcommand("staleness", "AUC when the map is not refreshed for L weeks");
  std::vector<int> slags{0, 1, 2, 3, 4};
  int sweeks = 10;
  std::string send, soutput2 = "staleness.csv";
  st->add_option("--lags", slags, "Lags in weeks")->delimiter(',');
  st->add_option("--weeks", sweeks, "Number of scored weeks")->capture_default_str();
  st->add_option("--end", send, "Last scored week");
  st->add_option("--output", soutput2, "CSV output file")->capture_default_str();

  // serve
  auto* sv = app.add_subcommand("serve", "Run the HTTP service");
  std::string host = "127.0.0.1";
  int port = 8080;
  sv->add_option("--host", host, "Listen address")->capture_default_str();
  sv->add_option("--port", port, "Port (0 picks a free one)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ingest->parsed()) {
      Workspace ws(load_config(common));
      if (const auto* r = ws.ingest_report()) {
        err << "accepted " << r->accepted << ", rejected " << r->rejected << ", kept "
            << ws.events().size() << " after cleaning\n";
        for (std::size_t k = 0; k < r->rejections.size() && k < 10; ++k) {
          err << "  line " << r->rejections[k].line << ": " << r->rejections[k].reason << '\n';
        }
      }
      emit(ws.dataset_entry());
      emit(ws.config_entry());
      emit(ws.grid_entry());
      return 0;
    }

    if (synth->parsed()) {
      if (!sstart.empty()) sspec.start = date_arg(sstart, "--start");
      if (!sbbox.empty()) sspec.bbox = BBox{sbbox[0], sbbox[1], sbbox[2], sbbox[3]};
      const SyntheticDataset data = generate_synthetic_events(sspec);
      std::ostringstream csv;
      write_events_csv(csv, data.events);
      const nlohmann::json spec_json = {
          {"weeks", sspec.weeks},
          {"clusters", sspec.clusters},
          {"events_per_week", sspec.events_per_week},
          {"background", sspec.background_share},
          {"drift", sspec.drift_km_per_week},
          {"seed", sspec.seed},
          {"start", format_date(sspec.start)},
          {"bbox", {sspec.bbox.lon_min, sspec.bbox.lat_min, sspec.bbox.lon_max, sspec.bbox.lat_max}}};
      ArtifactStore store(store_root(common));
      const StoreEntry e = store.put("dataset", csv.str(), sha256_hex(spec_json.dump()),
                                     {{"events", std::to_string(data.events.size())},
                                      {"source", "synthetic"},
                                      {"first", format_date(sspec.start)},
                                      {"synthetic", spec_json.dump()}});
      if (!scsv.empty()) write_text(scsv, csv.str());
      err << data.events.size() << " synthetic events over " << sspec.weeks << " weeks\n";
      emit(e);
      return 0;
    }

    if (fitc->parsed()) {
      RunConfig cfg = load_config(common);
      if (fmodel > 0) cfg.model = fmodel;
      if (fwarmup >= 0) cfg.schedule.warmup = fwarmup;
      if (fsamples > 0) cfg.schedule.samples = fsamples;
      if (fchains > 0) cfg.chains = fchains;
      if (fitc->count("--seed") > 0) cfg.seed = fseed;
      Date week{};
      if (!fweek.empty()) {
        week = date_arg(fweek, "--week");
      } else if (cfg.week) {
        week = *cfg.week;
      } else {
        throw ArgumentError("fit needs --week or a config week");
      }
      Workspace ws(std::move(cfg));
      std::optional<TimeWindow> window;
      if (!fwindow.empty()) window = TimeWindow::parse(fwindow);
      std::optional<std::vector<IntelPoint>> intel;
      if (!fintel.empty()) intel = intel_arg(ws, fintel);
      const auto fits = ws.fit(week, window, intel ? &*intel : nullptr);
      emit(ws.config_entry());
      for (const auto& f : fits) {
        emit(f.model);
        emit(f.summary);
        if (!fsummary.empty()) {
          std::string path = fsummary;
          const auto w = f.model.meta.find("window");
          if (fits.size() > 1 && w != f.model.meta.end()) {
            const fs::path p(fsummary);
            path = (p.parent_path() / (p.stem().string() + "-" + w->second + p.extension().string())).string();
          }
          write_text(path, ws.store().get(f.summary.id));
        }
      }
      return 0;
    }

    if (fc->parsed()) {
      std::unique_ptr<Workspace> ws;
      std::optional<StoreEntry> model;
      if (!cmodel.empty()) {
        ArtifactStore store(store_root(common));
        model = store.entry(cmodel);
        if (!model) throw NotFoundError("unknown artifact " + cmodel);
        if (model->kind != "model") throw ArgumentError(cmodel + " is not a model");
        if (common.threads > 0) set_threads(common.threads);
        ws = Workspace::from_stored_config(store.root(), model->meta.at("config"));
      } else {
        ws = std::make_unique<Workspace>(load_config(common));
      }
      Date week{};
      if (!cweek.empty()) {
        week = date_arg(cweek, "--week");
      } else if (model) {
        week = date_arg(model->meta.at("forecast_week"), "model forecast week");
      } else if (ws->config().week) {
        week = *ws->config().week + std::chrono::days{ws->config().block_length_days};
      } else {
        throw ArgumentError("forecast needs --week, --model or a config week");
      }
      std::vector<TimeWindow> windows;
      for (const auto& w : cwindows) windows.push_back(TimeWindow::parse(w));
      if (windows.empty()) {
        const std::string fitted = model ? model->meta.at("window") : "";
        if (!fitted.empty()) {
          windows.push_back(TimeWindow::parse(fitted));
        } else {
          windows = ws->config().windows;
        }
      }
      if (!coutput.empty() && windows.size() != 1) throw ArgumentError("--output needs exactly one --window");
      std::optional<std::vector<IntelPoint>> intel;
      if (!cintel.empty()) intel = intel_arg(*ws, cintel);
      std::ostream& lines = coutput == "-" ? err : out;

      for (const auto& w : windows) {
        std::optional<StoreEntry> f;
        if (model) {
          f = ws->forecast_from_model(model->id, week, w, intel ? &*intel : nullptr);
        } else {
          if (!intel) f = ws->forecast(week, w);
          if (!f) {
            auto m = ws->find_model(week, w);
            if (!m) {
              const auto fits = ws->fit(week - std::chrono::days{ws->config().block_length_days},
                                        ws->spec().spatial_only ? std::optional<TimeWindow>(w) : std::nullopt);
              for (const auto& o : fits) lines << o.model.manifest_line() << '\n';
              m = fits.front().model;
            }
            f = ws->forecast_from_model(m->id, week, w, intel ? &*intel : nullptr);
          }
        }
        const std::string text = forecast_text(ws->load_forecast(f->id), cformat);
        if (coutput == "-") {
          out << text;
        } else {
          const std::string path =
              !coutput.empty() ? coutput
                               : (fs::path(cdir) / ("forecast-" + format_date(week) + "-" + w.label() + "." + cformat))
                                     .string();
          write_text(path, text);
          err << "wrote " << path << '\n';
        }
        lines << f->manifest_line() << '\n';
      }
      return 0;
    }

    if (ev->parsed()) {
      ArtifactStore store(store_root(common));
      for (std::size_t k = 0; k < eids.size(); ++k) {
        const auto entry = store.entry(eids[k]);
        if (!entry) throw NotFoundError("unknown artifact " + eids[k]);
        if (entry->kind != "forecast") throw ArgumentError(eids[k] + " is not a forecast");
        const auto ws = Workspace::from_stored_config(store.root(), entry->meta.at("config"));
        auto e = ws->evaluate(eids[k]);
        e.row.intel = entry->meta.count("intel") ? entry->meta.at("intel") : "none";
        Manifest manifest = csv_manifest(*ws);
        manifest.emplace_back("forecast", eids[k]);
        std::ostringstream csv;
        write_metric_rows_csv(csv, std::span<const MetricRow>(&e.row, 1), manifest);
        const StoreEntry m = ws->store().put("metrics", csv.str(), ws->config_hash(), {{"forecast_id", eids[k]}});
        if (e.has_actuals) {
          err << eids[k] << ": " << e.row.week << ' ' << e.row.window.label() << " events " << e.row.events
              << " auc " << format_opt(e.row.auc) << " capture@20 " << format_opt(e.row.capture20) << " capture@40 "
              << format_opt(e.row.capture40) << '\n';
        } else {
          err << eids[k] << ": no actuals for this week\n";
        }
        if (k == 0 && !ecurve.empty()) {
          std::ostringstream c;
          write_curve_csv(c, e.curve, manifest);
          write_text(ecurve, c.str());
        }
        emit(m);
      }
      return 0;
    }

    if (bt->parsed()) {
      Workspace ws(load_config(common));
      BacktestConfig cfg;
      cfg.run = ws.config().run_config();
      cfg.models = bmodels;
      cfg.weeks = recent_weeks(ws, bweeks, bend);
      cfg.windows = ws.config().windows;
      cfg.history_weeks = ws.config().history_weeks;
      cfg.intel_seeds = ws.config().intel.seeds;
      cfg.intel_seed = ws.config().intel.seed;
      for (const auto& s : bintel) {
        const auto colon = s.find(':');
        std::optional<double> p, d;
        if (colon != std::string::npos) {
          p = parse_double(s.substr(0, colon));
          d = parse_double(s.substr(colon + 1));
        }
        if (!p || !d) throw ArgumentError("--intel must look like p:d, e.g. 0.5:100");
        cfg.intel.push_back(IntelSetting{*p, *d});
      }
      const BacktestResult r = backtest(ws.events(), ws.grid(), cfg);
      for (const auto& f : r.failures) err << "model " << f.model << " week " << f.week << ": " << f.reason << '\n';
      if (r.rows.empty()) throw FitError("backtest produced no rows");
      Manifest manifest = csv_manifest(ws);
      manifest.emplace_back("weeks", format_date(cfg.weeks.front()) + ".." + format_date(cfg.weeks.back()));
      std::ostringstream rows, summary;
      write_metric_rows_csv(rows, r.rows, manifest);
      write_summary_csv(summary, r.summary, manifest);
      fs::create_directories(bdir);
      write_text((fs::path(bdir) / "backtest-rows.csv").string(), rows.str());
      write_text((fs::path(bdir) / "backtest-summary.csv").string(), summary.str());
      emit(ws.store().put("backtest-rows", rows.str(), ws.config_hash(), {{"config", ws.config_entry().id}}));
      emit(ws.store().put("backtest-summary", summary.str(), ws.config_hash(), {{"config", ws.config_entry().id}}));
      return 0;
    }

    if (si->parsed()) {
      Workspace ws(load_config(common));
      IntelSimulation sim;
      sim.proportion = sp.value_or(ws.config().intel.proportion);
      sim.radius_m = sd.value_or(ws.config().intel.radius_m);
      sim.seed = sseed.value_or(ws.config().intel.seed);
      const Date week = date_arg(sweek, "--week");
      const auto points = simulate_expert_intel(ws.week_events(week), sim, ws.config().windows);
      std::ostringstream p, d;
      p << sim.proportion;
      d << sim.radius_m;
      const StoreEntry e = ws.put_intel(points, {{"week", format_date(week)},
                                                 {"p", p.str()},
                                                 {"d", d.str()},
                                                 {"seed", std::to_string(sim.seed)},
                                                 {"source", "simulated"}});
      if (!soutput.empty()) write_text(soutput, ws.store().get(e.id));
      err << points.size() << " intel points for week " << format_date(week) << '\n';
      emit(e);
      return 0;
    }

    if (df->parsed()) {
      ArtifactStore store(store_root(common));
      auto load = [&](const std::string& id) {
        const auto e = store.entry(id);
        if (!e) throw NotFoundError("unknown artifact " + id);
        if (e->kind != "forecast") throw ArgumentError(id + " is not a forecast");
        return std::make_pair(*e, forecast_from_json(store.get(id)));
      };
      const auto [ea, a] = load(da);
      const auto [eb, b] = load(db);
      const std::string geo = diff_geojson(a, b);
      const MapDiff d = diff_maps(a, b);
      const std::string path = doutput.empty() ? "diff-" + da + "-" + db + ".geojson" : doutput;
      write_text(path, geo);
      err << "blue " << d.blue << " (" << format_opt(d.blue_fraction) << "), green " << d.green << " ("
          << format_opt(d.green_fraction) << "); wrote " << path << '\n';
      emit(store.put("diff", geo, ea.config_hash, {{"a", da}, {"b", db}}));
      return 0;
    }

    if (st->parsed()) {
      Workspace ws(load_config(common));
      const auto weeks = recent_weeks(ws, sweeks, send);
      const StalenessResult r = staleness_analysis(ws.events(), ws.grid(), ws.spec(), weeks, slags,
                                                   ws.config().windows, ws.config().run_config());
      for (const auto& n : r.notices) err << n << '\n';
      std::ostringstream csv;
      write_staleness_csv(csv, r, csv_manifest(ws));
      write_text(soutput2, csv.str());
      emit(ws.store().put("staleness", csv.str(), ws.config_hash(), {{"config", ws.config_entry().id}}));
      return 0;
    }

    if (sv->parsed()) {
      auto ws = std::make_shared<Workspace>(load_config(common));
      Service service(ws, ServiceOptions{ws->config().fit_workers});
      const int bound = service.bind(host, port);
      if (bound < 0) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
      err << "serving " << ws->config_hash().substr(0, 12) << " on http://" << host << ':' << bound << '\n';
      err.flush();
      return service.listen() ? 0 : 1;
    }
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NotFoundError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace hotspot
