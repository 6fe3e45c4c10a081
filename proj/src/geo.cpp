#include "hotspot/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "hotspot/errors.hpp"

namespace hotspot {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kEarthRadiusKm = 6371.0088;

bool ring_contains(const Polygon::Ring& ring, double lon, double lat) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const GeoPoint& a = ring[i];
    const GeoPoint& b = ring[j];
    if ((a.lat > lat) != (b.lat > lat)) {
      const double x = (b.lon - a.lon) * (lat - a.lat) / (b.lat - a.lat) + a.lon;
      if (lon < x) inside = !inside;
    }
  }
  return inside;
}

Polygon::Ring parse_ring(const nlohmann::json& coords) {
  Polygon::Ring ring;
  ring.reserve(coords.size());
  for (const auto& p : coords) {
    if (!p.is_array() || p.size() < 2) throw SchemaError("GeoJSON position must be [lon, lat]");
    ring.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return ring;
}

std::vector<Polygon::Ring> parse_polygon(const nlohmann::json& coords) {
  std::vector<Polygon::Ring> rings;
  for (const auto& r : coords) rings.push_back(parse_ring(r));
  return rings;
}

void collect(const nlohmann::json& geom, std::vector<std::vector<Polygon::Ring>>& out) {
  const std::string type = geom.value("type", "");
  if (type == "Polygon") {
    out.push_back(parse_polygon(geom.at("coordinates")));
  } else if (type == "MultiPolygon") {
    for (const auto& poly : geom.at("coordinates")) out.push_back(parse_polygon(poly));
  } else if (type == "Feature") {
    collect(geom.at("geometry"), out);
  } else if (type == "FeatureCollection") {
    for (const auto& f : geom.at("features")) collect(f, out);
  } else if (type == "GeometryCollection") {
    for (const auto& g : geom.at("geometries")) collect(g, out);
  } else {
    throw SchemaError("unsupported GeoJSON type for boundary: '" + type + "'");
  }
}

}  // namespace

LonLatScale lonlat_scale(double lat_deg) {
  return {kKmPerDegree * std::cos(lat_deg * kDegToRad), kKmPerDegree};
}

double haversine_km(GeoPoint a, GeoPoint b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = phi2 - phi1;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(s)));
}

bool BBox::valid() const {
  return std::isfinite(lon_min) && std::isfinite(lon_max) && std::isfinite(lat_min) &&
         std::isfinite(lat_max) && lon_min < lon_max && lat_min < lat_max;
}

bool BBox::contains(double lon, double lat) const {
  return lon >= lon_min && lon <= lon_max && lat >= lat_min && lat <= lat_max;
}

GeoPoint BBox::center() const { return {(lon_min + lon_max) / 2, (lat_min + lat_max) / 2}; }

Polygon::Polygon(std::vector<std::vector<Ring>> parts) : parts_(std::move(parts)) {}

Polygon Polygon::from_geojson(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("boundary GeoJSON does not parse: ") + e.what());
  }
  std::vector<std::vector<Ring>> parts;
  collect(doc, parts);
  if (parts.empty()) throw SchemaError("boundary GeoJSON contains no polygons");
  return Polygon(std::move(parts));
}

Polygon Polygon::from_geojson_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open boundary file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_geojson(buf.str());
}

bool Polygon::contains(double lon, double lat) const {
  for (const auto& rings : parts_) {
    bool inside = false;
    for (const auto& ring : rings) {
      if (ring_contains(ring, lon, lat)) inside = !inside;
    }
    if (inside) return true;
  }
  return false;
}

BBox Polygon::bounds() const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  BBox box{inf, inf, -inf, -inf};
  for (const auto& rings : parts_) {
    for (const auto& ring : rings) {
      for (const auto& p : ring) {
        box.lon_min = std::min(box.lon_min, p.lon);
        box.lon_max = std::max(box.lon_max, p.lon);
        box.lat_min = std::min(box.lat_min, p.lat);
        box.lat_max = std::max(box.lat_max, p.lat);
      }
    }
  }
  return box;
}

}  // namespace hotspot
