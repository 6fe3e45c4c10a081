#pragma once

#include <string>
#include <vector>

namespace hotspot {

inline constexpr double kKmPerDegree = 111.32;

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;
};

struct LonLatScale {
  double km_per_deg_lon = 0.0;
  double km_per_deg_lat = 0.0;
};

// Spherical-earth kilometres per degree at the given latitude.
LonLatScale lonlat_scale(double lat_deg);

// Great-circle distance on a sphere of radius 6371.0088 km.
double haversine_km(GeoPoint a, GeoPoint b);

struct BBox {
  double lon_min = 0.0;
  double lat_min = 0.0;
  double lon_max = 0.0;
  double lat_max = 0.0;

  bool valid() const;
  bool contains(double lon, double lat) const;
  GeoPoint center() const;
};

// GeoJSON Polygon / MultiPolygon. Each polygon is an outer ring followed by
// holes; containment uses the even-odd rule over all rings of a polygon.
class Polygon {
 public:
  using Ring = std::vector<GeoPoint>;

  Polygon() = default;
  explicit Polygon(std::vector<std::vector<Ring>> parts);

  static Polygon from_geojson(const std::string& text);
  static Polygon from_geojson_file(const std::string& path);

  bool contains(double lon, double lat) const;
  bool empty() const { return parts_.empty(); }
  BBox bounds() const;

 private:
  std::vector<std::vector<Ring>> parts_;
};

}  // namespace hotspot
