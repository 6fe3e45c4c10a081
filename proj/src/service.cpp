#include "hotspot/service.hpp"

#include <cmath>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "hotspot/errors.hpp"
#include "hotspot/geo.hpp"

namespace hotspot {
namespace {

using nlohmann::json;

struct HttpError {
  int status;
  std::string message;
  json extra = json::object();
};

std::string param(const httplib::Request& req, const std::string& name) {
  if (!req.has_param(name)) throw HttpError{400, "missing query parameter '" + name + "'"};
  return req.get_param_value(name);
}

Date parse_week(const std::string& text) {
  const auto d = parse_date(text);
  if (!d) throw HttpError{400, "week must be YYYY-MM-DD, got '" + text + "'"};
  return *d;
}

json body_object(const httplib::Request& req) {
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw HttpError{400, "request body is not valid JSON"};
  if (!j.is_object()) throw HttpError{400, "request body must be a JSON object"};
  return j;
}

std::string required_string(const json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_string()) throw HttpError{400, "field '" + field + "' must be a string"};
  return j[field].get<std::string>();
}

IntelPoint intel_point(const json& p) {
  if (!p.is_object()) throw HttpError{400, "intel points must be objects"};
  IntelPoint out;
  if (!p.contains("lon") || !p["lon"].is_number() || !p.contains("lat") || !p["lat"].is_number()) {
    throw HttpError{400, "intel point needs numeric lon and lat"};
  }
  out.lon = p["lon"].get<double>();
  out.lat = p["lat"].get<double>();
  if (!std::isfinite(out.lon) || !std::isfinite(out.lat) || std::abs(out.lat) > 90.0 || std::abs(out.lon) > 180.0) {
    throw HttpError{400, "intel point coordinates out of range"};
  }
  if (p.contains("window") && p["window"].is_string()) {
    out.window = TimeWindow::parse(p["window"].get<std::string>());
  } else if (p.contains("window_start") && p.contains("window_end")) {
    out.window = TimeWindow{p["window_start"].get<double>(), p["window_end"].get<double>()};
  } else {
    throw HttpError{400, "intel point needs a window (\"20-24\") or window_start/window_end"};
  }
  if (!out.window.valid()) throw HttpError{400, "intel point window is invalid"};
  if (p.contains("source")) out.source = intel_source_from_string(p["source"].get<std::string>());
  if (p.contains("note")) out.note = p["note"].get<std::string>();
  return out;
}

json intel_json(const IntelPoint& p) {
  return {{"lon", p.lon},
          {"lat", p.lat},
          {"window", p.window.label()},
          {"window_start", p.window.t1},
          {"window_end", p.window.t2},
          {"source", to_string(p.source)},
          {"note", p.note}};
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json fit_hint(const std::string& week) {
  return {{"hint", "POST /api/fit with {\"week\": \"" + week + "\"} to fit a model for this week"}};
}

const char* meta_of(const StoreEntry& e, const std::string& key) {
  const auto it = e.meta.find(key);
  return it == e.meta.end() ? "" : it->second.c_str();
}

}  // namespace

struct Service::Impl {
  struct Job {
    std::string id;
    std::string week;
    std::optional<TimeWindow> window;
    std::string status = "queued";  // queued, running, done, failed
    std::string error;
    std::vector<std::string> model_ids;
  };

  std::shared_ptr<Workspace> ws;
  ServiceOptions options;
  httplib::Server server;

  std::mutex mu;
  std::condition_variable work_cv;
  std::condition_variable idle_cv;
  std::map<std::string, Job> jobs;
  std::deque<std::string> queue;
  std::set<std::string> active_weeks;
  std::size_t running = 0;
  std::size_t next_job = 1;
  bool stopping = false;
  std::vector<std::thread> workers;

  Impl(std::shared_ptr<Workspace> w, ServiceOptions o) : ws(std::move(w)), options(o) {
    if (!ws) throw ArgumentError("service: no workspace");
    if (options.fit_workers < 1) throw ArgumentError("service: fit_workers must be positive");
    routes();
    for (int i = 0; i < options.fit_workers; ++i) workers.emplace_back([this] { work(); });
  }

  ~Impl() {
    server.stop();
    {
      std::lock_guard lock(mu);
      stopping = true;
    }
    work_cv.notify_all();
    for (auto& t : workers) t.join();
  }

  void send(httplib::Response& res, int status, json body) const {
    body["config_hash"] = ws->config_hash();
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  template <typename F>
  httplib::Server::Handler wrap(F&& f) {
    return [this, f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const HttpError& e) {
        json body = e.extra;
        body["error"] = e.message;
        send(res, e.status, body);
      } catch (const NotFoundError& e) {
        send(res, 404, {{"error", e.what()}});
      } catch (const ArgumentError& e) {
        send(res, 400, {{"error", e.what()}});
      } catch (const json::exception& e) {
        send(res, 400, {{"error", std::string("malformed request: ") + e.what()}});
      } catch (const std::exception& e) {
        send(res, 500, {{"error", e.what()}});
      }
    };
  }

  json job_json(const Job& j) const {
    json ids = j.model_ids;
    json out = {{"job_id", j.id}, {"week", j.week}, {"status", j.status}, {"model_ids", ids}};
    if (j.window) out["window"] = j.window->label();
    if (!j.error.empty()) out["error"] = j.error;
    return out;
  }

  void work() {
    for (;;) {
      std::string id;
      Date training{};
      std::optional<TimeWindow> window;
      {
        std::unique_lock lock(mu);
        work_cv.wait(lock, [&] { return stopping || !queue.empty(); });
        if (stopping) return;
        id = queue.front();
        queue.pop_front();
        Job& job = jobs.at(id);
        job.status = "running";
        training = *parse_date(job.week) - std::chrono::days{ws->config().block_length_days};
        window = job.window;
        ++running;
      }
      std::vector<std::string> ids;
      std::string error;
      try {
        for (const auto& o : ws->fit(training, window)) ids.push_back(o.model.id);
      } catch (const std::exception& e) {
        error = e.what();
      }
      {
        std::lock_guard lock(mu);
        Job& job = jobs.at(id);
        job.status = error.empty() ? "done" : "failed";
        job.error = error;
        job.model_ids = ids;
        active_weeks.erase(job.week);
        --running;
      }
      idle_cv.notify_all();
    }
  }

  void routes() {
    server.set_pre_routing_handler([this](const httplib::Request&, httplib::Response& res) {
      if (!StoreLock::try_acquire(ws->store().root(), StoreLock::Mode::shared)) {
        send(res, 503, {{"error", "store is locked; retry shortly"}});
        res.set_header("Retry-After", "1");
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });
    server.set_post_routing_handler([this](const httplib::Request&, httplib::Response& res) {
      res.set_header("X-Config-Hash", ws->config_hash());
    });
    server.set_error_handler([this](const httplib::Request&, httplib::Response& res) {
      if (res.status == 404 && res.body.empty()) send(res, 404, {{"error", "no such endpoint"}});
    });

    server.Get("/api/weeks", wrap([this](const httplib::Request&, httplib::Response& res) { weeks(res); }));
    server.Get("/api/forecast", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string week = param(req, "week");
      const TimeWindow window = TimeWindow::parse(param(req, "window"));
      const auto f = ws->forecast(parse_week(week), window);
      if (!f) throw HttpError{404, "no fitted model for week " + week, fit_hint(week)};
      send_forecast(res, *f);
    }));
    server.Post("/api/intel", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const json body = body_object(req);
      if (!body.contains("points") || !body["points"].is_array()) throw HttpError{400, "field 'points' must be an array"};
      std::vector<IntelPoint> points;
      for (const auto& p : body["points"]) points.push_back(intel_point(p));
      std::map<std::string, std::string> meta;
      if (body.contains("week")) meta["week"] = format_date(parse_week(required_string(body, "week")));
      const StoreEntry e = ws->put_intel(points, meta);
      send(res, 200, {{"intel_id", e.id}, {"count", points.size()}});
    }));
    server.Get("/api/intel", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = param(req, "id");
      json points = json::array();
      for (const auto& p : ws->load_intel(id)) points.push_back(intel_json(p));
      send(res, 200, {{"intel_id", id}, {"count", points.size()}, {"points", points}});
    }));
    server.Post("/api/forecast/what-if", wrap([this](const httplib::Request& req, httplib::Response& res) {
      what_if(body_object(req), res);
    }));
    server.Get("/api/eval", wrap([this](const httplib::Request& req, httplib::Response& res) {
      evaluate(param(req, "forecast_id"), res);
    }));
    server.Get("/api/diff", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string a_id = param(req, "a");
      const std::string b_id = param(req, "b");
      const HotspotGrid a = ws->load_forecast(a_id);
      const HotspotGrid b = ws->load_forecast(b_id);
      json fc = json::parse(diff_geojson(a, b));
      fc["a"] = a_id;
      fc["b"] = b_id;
      const TransitionMatrix t = transition_matrix(a, b);
      fc["transitions"] = {{"red", t[0]}, {"yellow", t[1]}, {"other", t[2]}};
      send(res, 200, fc);
    }));
    server.Get("/api/params", wrap([this](const httplib::Request& req, httplib::Response& res) {
      params(param(req, "model_id"), res);
    }));
    server.Post("/api/fit", wrap([this](const httplib::Request& req, httplib::Response& res) {
      fit(body_object(req), res);
    }));
    server.Get("/api/fit/status", wrap([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = param(req, "job_id");
      std::lock_guard lock(mu);
      const auto it = jobs.find(id);
      if (it == jobs.end()) throw HttpError{404, "unknown fit job " + id};
      send(res, 200, job_json(it->second));
    }));
  }

  void send_forecast(httplib::Response& res, const StoreEntry& entry) const {
    const HotspotGrid h = ws->load_forecast(entry.id);
    json fc = json::parse(forecast_geojson(h));
    fc["forecast_id"] = entry.id;
    fc["week"] = h.week;
    fc["window"] = h.window.label();
    fc["model"] = h.model_id;
    fc["intel"] = meta_of(entry, "intel");
    send(res, 200, fc);
  }

  void weeks(httplib::Response& res) const {
    std::vector<Date> weeks = ws->weeks();
    if (!weeks.empty()) weeks.push_back(weeks.back() + std::chrono::days{ws->config().block_length_days});
    const auto models = ws->store().list("model");
    const auto forecasts = ws->store().list("forecast");
    json list = json::array();
    for (const Date w : weeks) {
      const std::string label = format_date(w);
      json models_for = json::array();
      for (const auto& m : models) {
        if (m.config_hash == ws->config_hash() && meta_of(m, "forecast_week") == label) models_for.push_back(m.id);
      }
      json forecasts_for = json::array();
      for (const auto& f : forecasts) {
        if (f.config_hash == ws->config_hash() && meta_of(f, "week") == label) {
          forecasts_for.push_back(
              {{"forecast_id", f.id}, {"window", meta_of(f, "window")}, {"intel", meta_of(f, "intel")}});
        }
      }
      list.push_back({{"week", label},
                      {"events", ws->week_events(w).size()},
                      {"fitted", !models_for.empty()},
                      {"model_ids", models_for},
                      {"forecasts", forecasts_for}});
    }
    json windows = json::array();
    for (const auto& w : ws->config().windows) windows.push_back(w.label());
    send(res, 200, {{"model", ws->spec().id}, {"windows", windows}, {"weeks", list}});
  }

  void what_if(const json& body, httplib::Response& res) {
    const std::string week = required_string(body, "week");
    const Date d = parse_week(week);
    const TimeWindow window = TimeWindow::parse(required_string(body, "window"));
    bool include = true;
    if (body.contains("include_intel")) {
      if (!body["include_intel"].is_boolean()) throw HttpError{400, "field 'include_intel' must be a boolean"};
      include = body["include_intel"].get<bool>();
    }
    if (!include) {
      const auto f = ws->forecast(d, window);
      if (!f) throw HttpError{404, "no fitted model for week " + week, fit_hint(week)};
      send(res, 200, {{"forecast_id", f->id}, {"include_intel", false}});
      return;
    }
    std::vector<IntelPoint> points;
    json intel_id = nullptr;
    if (body.contains("intel_id")) {
      intel_id = required_string(body, "intel_id");
      points = ws->load_intel(intel_id.get<std::string>());
    } else if (body.contains("points") && body["points"].is_array()) {
      for (const auto& p : body["points"]) points.push_back(intel_point(p));
    } else {
      throw HttpError{400, "give intel_id or points, or set include_intel to false"};
    }
    if (!ws->spec().accepts_expert) {
      throw HttpError{400, "model " + std::to_string(ws->spec().id) + " does not take intel"};
    }
    const auto model = ws->find_model(d, window);
    if (!model) throw HttpError{404, "no fitted model for week " + week, fit_hint(week)};
    const StoreEntry f = ws->forecast_from_model(model->id, d, window, &points);
    send(res, 200, {{"forecast_id", f.id}, {"include_intel", true}, {"intel_id", intel_id}, {"count", points.size()}});
  }

  void evaluate(const std::string& id, httplib::Response& res) const {
    const auto e = ws->evaluate(id);
    json out = {{"forecast_id", id},
                {"week", e.row.week},
                {"window", e.row.window.label()},
                {"model", e.row.model},
                {"has_actuals", e.has_actuals},
                {"events", e.curve.events},
                {"outside", e.curve.outside},
                {"auc", opt(e.row.auc)},
                {"capture20", opt(e.row.capture20)},
                {"capture40", opt(e.row.capture40)},
                {"pai20", opt(e.row.pai20)},
                {"pai40", opt(e.row.pai40)}};
    if (e.has_actuals) {
      out["curve"] = {{"area", e.curve.area}, {"capture", e.curve.capture}};
    } else {
      out["message"] = "no actuals for this week";
    }
    send(res, 200, out);
  }

  void params(const std::string& id, httplib::Response& res) const {
    const auto entry = ws->store().entry(id);
    const FittedModel model = ws->load_model(id);
    json rows = json::array();
    for (const auto& s : summarize(model.adaptive.chains)) {
      rows.push_back({{"name", s.name}, {"mean", s.mean}, {"lower", s.lower}, {"upper", s.upper}});
    }
    const ModelParams& mean = model.mean();
    json weights = json::array();
    for (std::size_t k = 0; k < mean.weights.size() && k < model.fit_points.slot_lag.size(); ++k) {
      weights.push_back({{"lag", model.fit_points.slot_lag[k]}, {"weight", mean.weights[k]}});
    }
    const LonLatScale scale = lonlat_scale(ws->grid()->center(0).lat);
    json bandwidth = {{"lon_m", alpha_to_meters(mean.alpha1, scale.km_per_deg_lon)},
                      {"lat_m", alpha_to_meters(mean.alpha2, scale.km_per_deg_lat)}};
    if (mean.has_time) bandwidth["time_min"] = alpha3_to_minutes(mean.alpha3);
    send(res, 200,
         {{"model_id", id},
          {"model", std::atoi(meta_of(*entry, "model"))},
          {"training_week", meta_of(*entry, "training_week")},
          {"forecast_week", meta_of(*entry, "forecast_week")},
          {"window", meta_of(*entry, "window")},
          {"training_count", model.training_count},
          {"params", rows},
          {"weights", weights},
          {"bandwidth", bandwidth}});
  }

  void fit(const json& body, httplib::Response& res) {
    const std::string week = format_date(parse_week(required_string(body, "week")));
    std::optional<TimeWindow> window;
    if (body.contains("window")) window = TimeWindow::parse(required_string(body, "window"));
    const ModelSpec spec = ws->spec();
    if (spec.bandwidth == BandwidthMode::srot_abramson) throw HttpError{400, "model 3 needs no fit"};
    if (!spec.spatial_only) window.reset();

    std::vector<std::optional<TimeWindow>> needed;
    if (spec.spatial_only && !window) {
      for (const auto& w : ws->config().windows) needed.push_back(w);
    } else {
      needed.push_back(window);
    }
    json existing = json::array();
    for (const auto& w : needed) {
      if (const auto m = ws->find_model(*parse_date(week), w)) existing.push_back(m->id);
    }
    if (existing.size() == needed.size()) {
      send(res, 200, {{"status", "done"}, {"week", week}, {"model_ids", existing}});
      return;
    }

    std::lock_guard lock(mu);
    if (active_weeks.count(week) > 0) throw HttpError{409, "a fit for week " + week + " is already in progress"};
    Job job;
    job.id = "fit-" + std::to_string(next_job++);
    job.week = week;
    job.window = window;
    active_weeks.insert(week);
    queue.push_back(job.id);
    jobs.emplace(job.id, job);
    work_cv.notify_one();
    send(res, 202, job_json(job));
  }
};

Service::Service(std::shared_ptr<Workspace> workspace, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(workspace), options)) {}

Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Service::listen() { return impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

void Service::wait_for_fits() {
  std::unique_lock lock(impl_->mu);
  impl_->idle_cv.wait(lock, [&] { return impl_->queue.empty() && impl_->running == 0; });
}

}  // namespace hotspot
