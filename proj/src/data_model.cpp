#include "hotspot/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "hotspot/csv.hpp"
#include "hotspot/errors.hpp"

namespace hotspot {
namespace {

std::optional<int> parse_int(const std::string& s) {
  if (s.empty() || s.size() > 9) return std::nullopt;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  return std::stoi(s);
}

// HH:MM[:SS[.fff]] -> hours in [0, 24)
std::optional<double> parse_time_of_day(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() < 2 || parts.size() > 3) return std::nullopt;
  const auto h = parse_int(parts[0]);
  const auto m = parse_int(parts[1]);
  double sec = 0.0;
  if (parts.size() == 3) {
    const auto sv = parse_double(parts[2]);
    if (!sv) return std::nullopt;
    sec = *sv;
  }
  if (!h || !m || *h < 0 || *h > 23 || *m < 0 || *m > 59 || sec < 0.0 || sec >= 60.0) {
    return std::nullopt;
  }
  return *h + *m / 60.0 + sec / 3600.0;
}

std::string format_time_of_day(double hours) {
  const long total_ms = std::lround(hours * 3600.0 * 1000.0);
  const long h = total_ms / 3600000;
  const long m = (total_ms / 60000) % 60;
  const double s = static_cast<double>(total_ms % 60000) / 1000.0;
  std::ostringstream out;
  out << std::setfill('0') << std::setw(2) << h << ':' << std::setw(2) << m << ':';
  if (total_ms % 1000 == 0) {
    out << std::setw(2) << static_cast<long>(s);
  } else {
    out << std::fixed << std::setprecision(3) << std::setw(6) << s;
  }
  return out.str();
}

}  // namespace

std::optional<Date> parse_date(const std::string& text) {
  const std::string s = trim(text);
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  const auto y = parse_int(s.substr(0, 4));
  const auto m = parse_int(s.substr(5, 2));
  const auto d = parse_int(s.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{*y},
                                        std::chrono::month{static_cast<unsigned>(*m)},
                                        std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  std::ostringstream out;
  out << std::setfill('0') << std::setw(4) << static_cast<int>(ymd.year()) << '-' << std::setw(2)
      << static_cast<unsigned>(ymd.month()) << '-' << std::setw(2)
      << static_cast<unsigned>(ymd.day());
  return out.str();
}

Date week_start_of(Date d, std::chrono::weekday start) {
  const std::chrono::weekday wd{d};
  return d - (wd - start);
}

std::string TimeWindow::label() const {
  auto fmt = [](double h) {
    std::ostringstream out;
    if (h == std::floor(h)) {
      out << static_cast<int>(h);
    } else {
      out << h;
    }
    return out.str();
  };
  return fmt(t1) + "-" + fmt(t2);
}

TimeWindow TimeWindow::parse(const std::string& text) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) throw ArgumentError("time window must look like '20-24': " + text);
  auto to_hours = [&](const std::string& part) {
    const std::string p = trim(part);
    if (p.find(':') != std::string::npos) {
      const auto colon = p.find(':');
      const auto h = parse_int(p.substr(0, colon));
      const auto m = parse_int(p.substr(colon + 1));
      if (!h || !m) throw ArgumentError("bad time window bound: " + p);
      return *h + *m / 60.0;
    }
    const auto v = parse_double(p);
    if (!v) throw ArgumentError("bad time window bound: " + p);
    return *v;
  };
  TimeWindow w{to_hours(text.substr(0, dash)), to_hours(text.substr(dash + 1))};
  if (!w.valid()) throw ArgumentError("time window out of range: " + text);
  return w;
}

const std::array<TimeWindow, 6>& canonical_windows() {
  static const std::array<TimeWindow, 6> windows{
      TimeWindow{0, 4}, TimeWindow{4, 8}, TimeWindow{8, 12},
      TimeWindow{12, 16}, TimeWindow{16, 20}, TimeWindow{20, 24}};
  return windows;
}

std::size_t BlockedDataset::history_count() const {
  std::size_t n = 0;
  for (const auto& b : historical) n += b.size();
  return n;
}

ParsedEvents parse_events_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open event file " + path);
  return parse_events_csv(in, schema);
}

ParsedEvents parse_events_csv(std::istream& in, const CsvSchema& schema) {
  ParsedEvents out;
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("event CSV has no header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name, bool required) -> int {
    if (name.empty()) return -1;
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) throw SchemaError("event CSV is missing required column '" + name + "'");
      return -1;
    }
    return static_cast<int>(it - header.begin());
  };
  const int c_id = column(schema.event_id, true);
  const int c_date = column(schema.date, true);
  const int c_time = column(schema.time, true);
  const int c_lat = column(schema.lat, true);
  const int c_lon = column(schema.lon, true);
  const int c_anchor = column(schema.anchor, false);
  const int max_col = std::max({c_id, c_date, c_time, c_lat, c_lon, c_anchor});

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    auto reject = [&](std::string reason) {
      ++out.rejected;
      out.rejections.push_back({line_no, std::move(reason)});
    };
    if (static_cast<int>(f.size()) <= max_col) {
      reject("missing fields");
      continue;
    }
    const auto lon = parse_double(f[c_lon]);
    const auto lat = parse_double(f[c_lat]);
    if (!lon || !lat || std::abs(*lat) > 90.0 || std::abs(*lon) > 180.0) {
      reject("bad coordinate");
      continue;
    }
    const auto date = parse_date(f[c_date]);
    if (!date) {
      reject("bad date");
      continue;
    }
    const auto tod = parse_time_of_day(f[c_time]);
    if (!tod) {
      reject("bad time");
      continue;
    }
    EventRecord e;
    e.event_id = f[c_id];
    e.lon = *lon;
    e.lat = *lat;
    e.date = *date;
    e.time_of_day = *tod;
    if (c_anchor >= 0) e.anchor = f[c_anchor];
    out.events.push_back(std::move(e));
    ++out.accepted;
  }
  return out;
}

void write_events_csv(std::ostream& out, std::span<const EventRecord> events) {
  out << "event_id,date,time,lat,lon\n";
  out << std::setprecision(10);
  for (const auto& e : events) {
    out << e.event_id << ',' << format_date(e.date) << ',' << format_time_of_day(e.time_of_day)
        << ',' << e.lat << ',' << e.lon << '\n';
  }
}

CleanedEvents clean_events(std::span<const EventRecord> events, const BBox& bbox,
                           const std::optional<AnchorFilter>& anchor_filter) {
  if (!bbox.valid()) throw ArgumentError("clean_events: bounding box is degenerate");
  if (anchor_filter && !(anchor_filter->radius_km >= 0.0)) {
    throw ArgumentError("clean_events: anchor radius must be non-negative");
  }
  std::unordered_map<std::string, GeoPoint> anchor_by_key;
  if (anchor_filter) {
    for (const auto& [key, p] : anchor_filter->anchors) anchor_by_key[key] = p;
  }

  CleanedEvents out;
  out.report.input = events.size();
  std::set<std::tuple<long, double, double, double>> seen;
  for (const auto& e : events) {
    const auto key = std::make_tuple(static_cast<long>(e.date.time_since_epoch().count()),
                                     e.time_of_day, e.lon, e.lat);
    if (!seen.insert(key).second) {
      ++out.report.duplicates;
      continue;
    }
    if (!bbox.contains(e.lon, e.lat)) {
      ++out.report.outside_bbox;
      continue;
    }
    if (anchor_filter && !anchor_filter->anchors.empty()) {
      double dist = std::numeric_limits<double>::infinity();
      const auto it = anchor_by_key.find(e.anchor);
      if (!e.anchor.empty() && it != anchor_by_key.end()) {
        dist = haversine_km({e.lon, e.lat}, it->second);
      } else {
        for (const auto& [key, p] : anchor_filter->anchors) {
          dist = std::min(dist, haversine_km({e.lon, e.lat}, p));
        }
      }
      if (dist > anchor_filter->radius_km) {
        ++out.report.beyond_anchor;
        continue;
      }
    }
    out.events.push_back(e);
  }
  out.report.kept = out.events.size();
  return out;
}

BlockedDataset block_by_week(std::span<const EventRecord> events, int num_blocks,
                             Date training_week_start, int block_length_days) {
  if (num_blocks < 1) throw ArgumentError("block_by_week: need at least one historical block");
  if (block_length_days < 1) throw ArgumentError("block_by_week: block length must be positive");
  const std::chrono::days len{block_length_days};
  const Date history_start = training_week_start - len * num_blocks;
  if (!events.empty()) {
    Date earliest = events.front().date;
    for (const auto& e : events) earliest = std::min(earliest, e.date);
    if (history_start + len <= earliest) {
      throw ArgumentError("block_by_week: training week " + format_date(training_week_start) +
                          " precedes the available history (data starts " +
                          format_date(earliest) + ")");
    }
  }

  BlockedDataset out;
  out.block_length_days = block_length_days;
  out.historical.resize(static_cast<std::size_t>(num_blocks));
  for (int i = 0; i < num_blocks; ++i) {
    out.historical[i].index = i + 1;
    out.historical[i].start_date = history_start + len * i;
  }
  out.training.index = num_blocks + 1;
  out.training.start_date = training_week_start;

  for (const auto& e : events) {
    if (e.date < history_start || e.date >= training_week_start + len) continue;
    if (e.date >= training_week_start) {
      out.training.events.push_back(e);
    } else {
      const auto offset = (e.date - history_start).count() / block_length_days;
      out.historical[static_cast<std::size_t>(offset)].events.push_back(e);
    }
  }
  return out;
}

std::vector<EventRecord> events_between(std::span<const EventRecord> events, Date start,
                                        Date end_exclusive) {
  std::vector<EventRecord> out;
  for (const auto& e : events) {
    if (e.date >= start && e.date < end_exclusive) out.push_back(e);
  }
  return out;
}

std::vector<EventRecord> filter_time_window(std::span<const EventRecord> events,
                                            const TimeWindow& window) {
  std::vector<EventRecord> out;
  for (const auto& e : events) {
    if (window.contains(e.time_of_day)) out.push_back(e);
  }
  return out;
}

SpatialGrid::SpatialGrid(double origin_lon, double origin_lat, double cell_lon, double cell_lat,
                         int n_cols, int n_rows, std::vector<unsigned char> mask)
    : origin_lon_(origin_lon),
      origin_lat_(origin_lat),
      cell_lon_(cell_lon),
      cell_lat_(cell_lat),
      n_cols_(n_cols),
      n_rows_(n_rows),
      mask_(std::move(mask)) {
  if (mask_.size() != static_cast<std::size_t>(n_cols_) * static_cast<std::size_t>(n_rows_)) {
    throw ArgumentError("SpatialGrid: mask size does not match dimensions");
  }
  ids_.assign(mask_.size(), -1);
  int next = 0;
  for (int r = 0; r < n_rows_; ++r) {
    for (int c = 0; c < n_cols_; ++c) {
      const std::size_t k = static_cast<std::size_t>(r) * n_cols_ + c;
      if (!mask_[k]) continue;
      ids_[k] = next++;
      centers_.push_back({origin_lon_ + (c + 0.5) * cell_lon_, origin_lat_ + (r + 0.5) * cell_lat_});
      rows_.push_back(r);
      cols_.push_back(c);
    }
  }
}

std::optional<int> SpatialGrid::cell_of(double lon, double lat) const {
  const double fc = std::floor((lon - origin_lon_) / cell_lon_);
  const double fr = std::floor((lat - origin_lat_) / cell_lat_);
  if (!(fc >= 0 && fr >= 0 && fc < n_cols_ && fr < n_rows_)) return std::nullopt;
  const int id = ids_[static_cast<std::size_t>(fr) * n_cols_ + static_cast<std::size_t>(fc)];
  if (id < 0) return std::nullopt;
  return id;
}

std::array<GeoPoint, 4> SpatialGrid::corners(int cell_id) const {
  const double x0 = origin_lon_ + col_of(cell_id) * cell_lon_;
  const double y0 = origin_lat_ + row_of(cell_id) * cell_lat_;
  return {GeoPoint{x0, y0}, GeoPoint{x0 + cell_lon_, y0}, GeoPoint{x0 + cell_lon_, y0 + cell_lat_},
          GeoPoint{x0, y0 + cell_lat_}};
}

bool operator==(const SpatialGrid& a, const SpatialGrid& b) {
  return a.origin_lon_ == b.origin_lon_ && a.origin_lat_ == b.origin_lat_ &&
         a.cell_lon_ == b.cell_lon_ && a.cell_lat_ == b.cell_lat_ && a.n_cols_ == b.n_cols_ &&
         a.n_rows_ == b.n_rows_ && a.mask_ == b.mask_;
}

SpatialGrid build_grid(const BBox& bbox, double target_cell_meters,
                       const std::optional<Polygon>& mask_polygon) {
  if (!(target_cell_meters > 0.0)) throw ArgumentError("build_grid: cell size must be positive");
  if (!bbox.valid()) throw ArgumentError("build_grid: bounding box is degenerate");
  const auto scale = lonlat_scale(bbox.center().lat);
  const double cell_lon = target_cell_meters / 1000.0 / scale.km_per_deg_lon;
  const double cell_lat = target_cell_meters / 1000.0 / scale.km_per_deg_lat;
  // Tolerance keeps an exact multiple of the cell size from gaining a sliver column.
  const int n_cols = static_cast<int>(std::ceil((bbox.lon_max - bbox.lon_min) / cell_lon - 1e-9));
  const int n_rows = static_cast<int>(std::ceil((bbox.lat_max - bbox.lat_min) / cell_lat - 1e-9));
  std::vector<unsigned char> mask(static_cast<std::size_t>(n_cols) * n_rows, 1);
  if (mask_polygon) {
    for (int r = 0; r < n_rows; ++r) {
      for (int c = 0; c < n_cols; ++c) {
        const double lon = bbox.lon_min + (c + 0.5) * cell_lon;
        const double lat = bbox.lat_min + (r + 0.5) * cell_lat;
        mask[static_cast<std::size_t>(r) * n_cols + c] = mask_polygon->contains(lon, lat) ? 1 : 0;
      }
    }
  }
  return SpatialGrid(bbox.lon_min, bbox.lat_min, cell_lon, cell_lat, n_cols, n_rows,
                     std::move(mask));
}

}  // namespace hotspot
