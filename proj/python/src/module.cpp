#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "hotspot/cli.hpp"
#include "hotspot/errors.hpp"
#include "hotspot/evaluation.hpp"
#include "hotspot/forecast.hpp"
#include "hotspot/kernels.hpp"
#include "hotspot/workspace.hpp"

namespace py = pybind11;
using namespace hotspot;

namespace {

Date week_arg(const std::string& text) {
  const auto d = parse_date(text);
  if (!d) throw ArgumentError("week must be YYYY-MM-DD, got '" + text + "'");
  return *d;
}

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::object opt(const std::optional<double>& v) { return v ? py::object(py::float_(*v)) : py::object(py::none()); }

std::vector<IntelPoint> intel_points(const py::iterable& points) {
  std::vector<IntelPoint> out;
  for (const auto& item : points) {
    const auto p = item.cast<py::dict>();
    IntelPoint q;
    q.lon = p["lon"].cast<double>();
    q.lat = p["lat"].cast<double>();
    q.window = TimeWindow::parse(p["window"].cast<std::string>());
    if (p.contains("source")) q.source = intel_source_from_string(p["source"].cast<std::string>());
    if (p.contains("note")) q.note = p["note"].cast<std::string>();
    out.push_back(std::move(q));
  }
  return out;
}

py::dict forecast_dict(const std::string& id, const HotspotGrid& h) {
  std::vector<std::string> classes;
  for (const auto c : h.classes) classes.push_back(to_string(c));
  py::dict d;
  d["forecast_id"] = id;
  d["week"] = h.week;
  d["window"] = h.window.label();
  d["model"] = h.model_id;
  d["log_density"] = to_array(h.log_density);
  d["density"] = to_array(h.density);
  d["rank_pct"] = to_array(h.rank_pct);
  d["order"] = to_array(h.order);
  d["classes"] = classes;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spatio-temporal hotspot forecasting";

  py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_LookupError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ArgumentError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const SchemaError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("gaussian_kernel", &gaussian_kernel, py::arg("u"));
  m.def("log_bessel_i0", &log_bessel_i0, py::arg("x"));
  m.def("von_mises_density", &von_mises_density, py::arg("u_hours"), py::arg("tau"));
  m.def("von_mises_interval_mass", &von_mises_interval_mass, py::arg("center"), py::arg("t1"), py::arg("t2"),
        py::arg("tau"));

  m.def(
      "event_area_auc",
      [](const std::vector<int>& order, const std::vector<std::size_t>& counts) {
        return opt(auc(event_area_curve_from_ranking(order, counts)));
      },
      py::arg("order"), py::arg("counts"), "AUC of the event-area curve for a cell ranking and per-cell counts.");

  m.def(
      "synthesize_events",
      [](const std::string& path, int weeks, int clusters, double events_per_week, double background,
         std::uint64_t seed, const std::string& start) {
        SyntheticSpec spec;
        spec.weeks = weeks;
        spec.clusters = clusters;
        spec.events_per_week = events_per_week;
        spec.background_share = background;
        spec.seed = seed;
        spec.start = week_arg(start);
        const SyntheticDataset data = generate_synthetic_events(spec);
        std::ofstream out(path);
        if (!out) throw ArgumentError("cannot write " + path);
        write_events_csv(out, data.events);
        return data.events.size();
      },
      py::arg("path"), py::arg("weeks") = 10, py::arg("clusters") = 6, py::arg("events_per_week") = 50.0,
      py::arg("background") = 0.05, py::arg("seed") = 1, py::arg("start") = "2019-01-06",
      "Writes a synthetic events CSV and returns the number of events.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> all{"hotspot"};
        all.insert(all.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : all) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");

  py::class_<Workspace, std::shared_ptr<Workspace>>(m, "Workspace")
      .def(py::init([](const std::string& config_json, const std::string& base_dir) {
             return std::make_shared<Workspace>(RunConfig::from_json(config_json, base_dir));
           }),
           py::arg("config_json"), py::arg("base_dir") = "", py::call_guard<py::gil_scoped_release>())
      .def_property_readonly("config_hash", &Workspace::config_hash)
      .def_property_readonly("dataset_id", [](const Workspace& w) { return w.dataset_entry().id; })
      .def_property_readonly("config_id", [](const Workspace& w) { return w.config_entry().id; })
      .def_property_readonly("cell_count", [](const Workspace& w) { return w.grid()->cell_count(); })
      .def_property_readonly("event_count", [](const Workspace& w) { return w.events().size(); })
      .def("weeks",
           [](const Workspace& w) {
             std::vector<std::string> out;
             for (const Date d : w.weeks()) out.push_back(format_date(d));
             return out;
           })
      .def(
          "fit",
          [](Workspace& w, const std::string& training_week, const std::optional<std::string>& window) {
            std::optional<TimeWindow> win;
            if (window) win = TimeWindow::parse(*window);
            std::vector<Workspace::FitOutput> fits;
            {
              py::gil_scoped_release release;
              fits = w.fit(week_arg(training_week), win);
            }
            std::vector<std::string> ids;
            for (const auto& f : fits) ids.push_back(f.model.id);
            return ids;
          },
          py::arg("training_week"), py::arg("window") = py::none(), "Fits and stores models; returns their ids.")
      .def(
          "forecast",
          [](Workspace& w, const std::string& week, const std::string& window) -> std::optional<std::string> {
            py::gil_scoped_release release;
            const auto f = w.forecast(week_arg(week), TimeWindow::parse(window));
            if (!f) return std::nullopt;
            return f->id;
          },
          py::arg("week"), py::arg("window"), "Forecast id for a forecast week, or None when no model is fitted.")
      .def(
          "forecast_with_intel",
          [](Workspace& w, const std::string& model_id, const std::string& week, const std::string& window,
             const py::iterable& points) {
            const std::vector<IntelPoint> intel = intel_points(points);
            py::gil_scoped_release release;
            return w.forecast_from_model(model_id, week_arg(week), TimeWindow::parse(window), &intel).id;
          },
          py::arg("model_id"), py::arg("week"), py::arg("window"), py::arg("points"))
      .def("put_intel", [](Workspace& w, const py::iterable& points) { return w.put_intel(intel_points(points)).id; })
      .def("load_forecast",
           [](const Workspace& w, const std::string& id) { return forecast_dict(id, w.load_forecast(id)); })
      .def("forecast_geojson",
           [](const Workspace& w, const std::string& id) { return forecast_geojson(w.load_forecast(id)); })
      .def("diff_geojson",
           [](const Workspace& w, const std::string& a, const std::string& b) {
             return diff_geojson(w.load_forecast(a), w.load_forecast(b));
           })
      .def("evaluate", [](const Workspace& w, const std::string& id) {
        const auto e = w.evaluate(id);
        py::dict d;
        d["has_actuals"] = e.has_actuals;
        d["events"] = e.curve.events;
        d["auc"] = opt(e.row.auc);
        d["capture20"] = opt(e.row.capture20);
        d["capture40"] = opt(e.row.capture40);
        d["pai20"] = opt(e.row.pai20);
        d["pai40"] = opt(e.row.pai40);
        d["area"] = to_array(e.curve.area);
        d["capture"] = to_array(e.curve.capture);
        return d;
      });
}
