#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hotspot/geo.hpp"

namespace hotspot {

using Date = std::chrono::sys_days;

std::optional<Date> parse_date(const std::string& text);  // YYYY-MM-DD
std::string format_date(Date d);
// Latest date <= d falling on `start` (Sunday by default).
Date week_start_of(Date d, std::chrono::weekday start = std::chrono::Sunday);

struct EventRecord {
  std::string event_id;
  double lon = 0.0;
  double lat = 0.0;
  Date date{};
  double time_of_day = 0.0;  // hours in [0, 24)
  std::string anchor;        // jurisdiction / police-station key; may be empty
};

// Half-open interval [t1, t2) of the day, in hours.
struct TimeWindow {
  double t1 = 0.0;
  double t2 = 24.0;

  bool valid() const { return t1 >= 0.0 && t2 <= 24.0 && t1 < t2; }
  bool contains(double hours) const { return hours >= t1 && hours < t2; }
  double midpoint() const { return 0.5 * (t1 + t2); }
  std::string label() const;  // "20-24"
  // Accepts "20-24" or "20:00-24:00".
  static TimeWindow parse(const std::string& text);

  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

// {[0,4), [4,8), ..., [20,24)}
const std::array<TimeWindow, 6>& canonical_windows();
inline constexpr TimeWindow kWholeDay{0.0, 24.0};

struct TemporalBlock {
  int index = 0;  // 1..B for history (1 = oldest); 0 for the expert block
  bool is_expert = false;
  Date start_date{};
  std::vector<EventRecord> events;

  std::size_t size() const { return events.size(); }
};

struct BlockedDataset {
  std::vector<TemporalBlock> historical;  // oldest first
  TemporalBlock training;
  std::optional<TemporalBlock> expert;
  int block_length_days = 7;

  std::size_t history_count() const;
};

// --- ingestion -------------------------------------------------------------

struct CsvSchema {
  std::string event_id = "event_id";
  std::string date = "date";
  std::string time = "time";
  std::string lat = "lat";
  std::string lon = "lon";
  std::string anchor;  // optional column; empty = not present
};

struct RowRejection {
  std::size_t line = 0;
  std::string reason;
};

struct ParsedEvents {
  std::vector<EventRecord> events;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::vector<RowRejection> rejections;
};

ParsedEvents parse_events_csv(const std::string& path, const CsvSchema& schema = {});
ParsedEvents parse_events_csv(std::istream& in, const CsvSchema& schema = {});
void write_events_csv(std::ostream& out, std::span<const EventRecord> events);

struct AnchorFilter {
  // Anchor key -> location. Events whose `anchor` is unknown or empty are
  // checked against the nearest anchor.
  std::vector<std::pair<std::string, GeoPoint>> anchors;
  double radius_km = 5.0;
};

struct CleanReport {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t outside_bbox = 0;
  std::size_t beyond_anchor = 0;
  std::size_t duplicates = 0;
};

struct CleanedEvents {
  std::vector<EventRecord> events;
  CleanReport report;
};

// Drops exact duplicates on (date, time, lon, lat), events outside `bbox`,
// and events farther than the radius from their anchor (boundary kept).
CleanedEvents clean_events(std::span<const EventRecord> events, const BBox& bbox,
                           const std::optional<AnchorFilter>& anchor_filter = std::nullopt);

// --- temporal blocking -----------------------------------------------------

// Block i = 1 is the oldest of the `num_blocks` weeks preceding the training
// week; block B is the week immediately before it.
BlockedDataset block_by_week(std::span<const EventRecord> events, int num_blocks,
                             Date training_week_start, int block_length_days = 7);

std::vector<EventRecord> events_between(std::span<const EventRecord> events, Date start,
                                        Date end_exclusive);

std::vector<EventRecord> filter_time_window(std::span<const EventRecord> events,
                                            const TimeWindow& window);

// --- spatial grid ----------------------------------------------------------

class SpatialGrid {
 public:
  SpatialGrid() = default;
  SpatialGrid(double origin_lon, double origin_lat, double cell_lon, double cell_lat, int n_cols,
              int n_rows, std::vector<unsigned char> mask);

  std::size_t cell_count() const { return centers_.size(); }
  int n_cols() const { return n_cols_; }
  int n_rows() const { return n_rows_; }
  double origin_lon() const { return origin_lon_; }
  double origin_lat() const { return origin_lat_; }
  double cell_lon() const { return cell_lon_; }
  double cell_lat() const { return cell_lat_; }
  const std::vector<unsigned char>& mask() const { return mask_; }

  // Masked-in cell containing the point (left/bottom edges inclusive).
  std::optional<int> cell_of(double lon, double lat) const;
  GeoPoint center(int cell_id) const { return centers_.at(static_cast<std::size_t>(cell_id)); }
  std::array<GeoPoint, 4> corners(int cell_id) const;
  int row_of(int cell_id) const { return rows_.at(static_cast<std::size_t>(cell_id)); }
  int col_of(int cell_id) const { return cols_.at(static_cast<std::size_t>(cell_id)); }

  friend bool operator==(const SpatialGrid& a, const SpatialGrid& b);

 private:
  double origin_lon_ = 0.0;
  double origin_lat_ = 0.0;
  double cell_lon_ = 0.0;
  double cell_lat_ = 0.0;
  int n_cols_ = 0;
  int n_rows_ = 0;
  std::vector<unsigned char> mask_;  // row-major, n_rows * n_cols
  std::vector<int> ids_;             // row-major -> cell id or -1
  std::vector<GeoPoint> centers_;
  std::vector<int> rows_;
  std::vector<int> cols_;
};

// Square-ish cells of `target_cell_meters`, converted to degrees at the bbox
// centre latitude. Without a mask polygon every cell is in.
SpatialGrid build_grid(const BBox& bbox, double target_cell_meters,
                       const std::optional<Polygon>& mask_polygon = std::nullopt);

}  // namespace hotspot
