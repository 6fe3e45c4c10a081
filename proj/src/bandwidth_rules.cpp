#include "hotspot/bandwidth_rules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "hotspot/errors.hpp"

namespace hotspot {
namespace {

double quantile7(std::vector<double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double sample_sd(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

double silverman_bandwidth(std::span<const double> values) {
  if (values.size() < 2) throw ArgumentError("SROT needs at least two points");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile7(sorted, 0.75) - quantile7(sorted, 0.25);
  const double sd = sample_sd(values);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

double circular_sd_hours(std::span<const double> hours) {
  if (hours.empty()) throw ArgumentError("circular sd of an empty sample");
  double c = 0.0;
  double s = 0.0;
  for (double t : hours) {
    const double theta = 2.0 * std::numbers::pi * t / 24.0;
    c += std::cos(theta);
    s += std::sin(theta);
  }
  const double r = std::hypot(c, s) / static_cast<double>(hours.size());
  if (r >= 1.0) return 0.0;
  return std::sqrt(-2.0 * std::log(r));
}

SrotBandwidths srot_bandwidths(const MixturePoints& points, bool has_time) {
  const std::size_t n = points.size();
  if (n < 2) throw ArgumentError("SROT needs at least two pooled points (got " + std::to_string(n) + ")");
  SrotBandwidths out;
  out.h1 = silverman_bandwidth(points.lon);
  out.h2 = silverman_bandwidth(points.lat);
  if (!(out.h1 > 0.0) || !(out.h2 > 0.0)) {
    throw ArgumentError("SROT spatial bandwidth is zero: all points share a coordinate");
  }
  if (has_time) {
    const double sd = circular_sd_hours(points.hours);
    out.h3 = 0.9 * 24.0 / (2.0 * std::numbers::pi) * sd * std::pow(static_cast<double>(n), -0.2);
    if (!(out.h3 > 0.0)) throw ArgumentError("SROT time bandwidth is zero: all timestamps equal");
    out.tau = 1.0 / (out.h3 * out.h3);
  }
  return out;
}

SrotBandwidths srot_bandwidths(const BlockedDataset& blocked, bool has_time) {
  return srot_bandwidths(MixturePoints::from_blocks(blocked, false), has_time);
}

ModelParams abramson_params(const SrotBandwidths& srot, std::vector<double> weights, bool has_time) {
  ModelParams p;
  p.alpha1 = 1.0 / srot.h1;
  p.alpha2 = 1.0 / srot.h2;
  p.beta1 = 0.5;
  p.beta2 = 0.5;
  p.has_time = has_time;
  if (has_time) {
    p.alpha3 = 1.0 / srot.h3;
    p.beta3 = 0.5;
  } else {
    p.alpha3 = 0.0;
    p.beta3 = 0.0;
  }
  p.weights = std::move(weights);
  return p;
}

Bandwidths abramson_adaptive(const SrotBandwidths& srot, const LocalScales& scales, bool has_time) {
  ModelParams p = abramson_params(srot, {1.0}, has_time);
  return adaptive_bandwidths(p, scales);
}

}  // namespace hotspot
