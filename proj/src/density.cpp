#include "hotspot/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "hotspot/diagnostics.hpp"
#include "hotspot/errors.hpp"
#include "hotspot/kernels.hpp"
#include "hotspot/parallel.hpp"

namespace hotspot {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHoursToRad = std::numbers::pi / 12.0;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);
const double kLog24 = std::log(24.0);

}  // namespace

void ModelParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v < 1.0; };
  if (!positive(alpha1) || !positive(alpha2)) {
    throw ArgumentError("ModelParams: alpha1 and alpha2 must be positive");
  }
  if (!unit(beta1) || !unit(beta2)) throw ArgumentError("ModelParams: beta outside [0, 1)");
  if (has_time) {
    if (!(std::isfinite(alpha3) && alpha3 >= 0.0)) {
      throw ArgumentError("ModelParams: alpha3 must be non-negative");
    }
    if (!unit(beta3)) throw ArgumentError("ModelParams: beta3 outside [0, 1)");
  }
  if (weights.empty()) throw ArgumentError("ModelParams: no block weights");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ArgumentError("ModelParams: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ArgumentError("ModelParams: weights do not sum to 1 (sum=" + std::to_string(sum) + ")");
  }
}

MixturePoints MixturePoints::from_blocks(const BlockedDataset& blocked, bool include_expert) {
  MixturePoints out;
  const int num_blocks = static_cast<int>(blocked.historical.size());
  for (int i = 0; i < num_blocks; ++i) {
    const auto& block = blocked.historical[static_cast<std::size_t>(i)];
    const int lag = num_blocks - i;
    if (block.events.empty()) {
      out.dropped_lags.push_back(lag);
      continue;
    }
    out.add_slot(block.events, lag);
  }
  if (include_expert && blocked.expert && !blocked.expert->events.empty()) {
    out.add_slot(blocked.expert->events, 0);
    out.has_expert = true;
  }
  return out;
}

void MixturePoints::add_slot(std::span<const EventRecord> events, int lag) {
  const int s = static_cast<int>(slot_size.size());
  for (const auto& e : events) {
    lon.push_back(e.lon);
    lat.push_back(e.lat);
    hours.push_back(e.time_of_day);
    slot.push_back(s);
  }
  slot_size.push_back(events.size());
  slot_lag.push_back(lag);
}

PruningIndex::PruningIndex(std::span<const double> lon, std::span<const double> lat,
                           std::span<const double> radius) {
  if (lon.empty()) return;
  const double r_min = *std::min_element(radius.begin(), radius.end());
  if (!(r_min > 0.0)) throw ArgumentError("PruningIndex: radii must be positive");
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t p = 0; p < lon.size(); ++p) {
    const auto level = static_cast<std::size_t>(std::max(0.0, std::ceil(std::log2(radius[p] / r_min))));
    if (members.size() <= level) members.resize(level + 1);
    members[level].push_back(p);
  }
  for (auto& m : members) {
    if (m.empty()) continue;
    std::stable_sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) { return lon[a] < lon[b]; });
    Level level;
    for (std::size_t p : m) {
      level.max_radius = std::max(level.max_radius, radius[p]);
      level.lon.push_back(lon[p]);
      level.lat.push_back(lat[p]);
      level.radius_sq.push_back(radius[p] * radius[p]);
      level.index.push_back(p);
    }
    levels_.push_back(std::move(level));
  }
}

double log_sum_exp(std::span<const double> values) {
  double max = kNegInf;
  for (double v : values) max = std::max(max, v);
  if (max == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max);
  return max + std::log(sum);
}

MixtureDensity::MixtureDensity(MixturePoints points, ModelParams params, Bandwidths bandwidths,
                               EvalOptions options)
    : points_(std::move(points)),
      params_(std::move(params)),
      bandwidths_(std::move(bandwidths)),
      options_(options) {
  const std::size_t n = points_.size();
  if (params_.weights.size() != points_.slots()) {
    throw ArgumentError("MixtureDensity: " + std::to_string(params_.weights.size()) +
                        " weights for " + std::to_string(points_.slots()) + " blocks");
  }
  if (bandwidths_.h1.size() != n || bandwidths_.h2.size() != n ||
      (params_.has_time && bandwidths_.tau.size() != n)) {
    throw ArgumentError("MixtureDensity: bandwidth arrays do not match the point count");
  }
  std::vector<double> log_slot_weight(points_.slots());
  for (std::size_t s = 0; s < points_.slots(); ++s) {
    const double w = params_.weights[s];
    if (points_.slot_size[s] == 0) {
      if (w > 0.0) {
        throw EvaluationError("MixtureDensity: block " + std::to_string(s) +
                              " is empty but carries weight " + std::to_string(w));
      }
      log_slot_weight[s] = kNegInf;
      continue;
    }
    log_slot_weight[s] =
        w > 0.0 ? std::log(w) - std::log(static_cast<double>(points_.slot_size[s])) : kNegInf;
  }

  log_point_weight_.resize(n);
  log_spatial_coef_.resize(n);
  half_inv_h1_sq_.resize(n);
  half_inv_h2_sq_.resize(n);
  prune_radius_.resize(n);
  if (params_.has_time) log_time_norm_.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const double h1 = bandwidths_.h1[p];
    const double h2 = bandwidths_.h2[p];
    if (!(h1 > 0.0) || !(h2 > 0.0)) throw ArgumentError("MixtureDensity: bandwidths must be positive");
    log_point_weight_[p] = log_slot_weight[static_cast<std::size_t>(points_.slot[p])];
    log_spatial_coef_[p] = log_point_weight_[p] - std::log(h1) - std::log(h2) - kLog2Pi;
    half_inv_h1_sq_[p] = 0.5 / (h1 * h1);
    half_inv_h2_sq_[p] = 0.5 / (h2 * h2);
    prune_radius_[p] = kPruneRadiusBandwidths * std::max(h1, h2);
    if (params_.has_time) {
      log_time_norm_[p] = -kLog24 - log_bessel_i0_scaled(clamp_concentration(bandwidths_.tau[p]));
    }
  }
  if (options_.fast_eval) index_ = PruningIndex(points_.lon, points_.lat, prune_radius_);
}

template <typename Extra>
double MixtureDensity::accumulate(double lon, double lat, Extra&& extra) const {
  thread_local std::vector<double> terms;
  terms.clear();
  auto add = [&](std::size_t p) {
    const double base = log_spatial_coef_[p];
    if (base == kNegInf) return;
    const double dx = lon - points_.lon[p];
    const double dy = lat - points_.lat[p];
    const double t = base + extra(p) - dx * dx * half_inv_h1_sq_[p] - dy * dy * half_inv_h2_sq_[p];
    if (t != kNegInf) terms.push_back(t);
  };
  if (options_.fast_eval) {
    index_.for_each_near(lon, lat, add);
    if (!terms.empty()) return log_sum_exp(terms);
    // Nothing within the pruning radius: fall back to the exact sum so far
    // away cells still rank consistently.
  }
  for (std::size_t p = 0; p < points_.size(); ++p) add(p);
  const double result = log_sum_exp(terms);
  if (result == kNegInf) warn("mixture density underflowed at (" + std::to_string(lon) + ", " +
                              std::to_string(lat) + ")");
  return result;
}

double MixtureDensity::log_density(double lon, double lat, double hours) const {
  if (!params_.has_time) return log_spatial_density(lon, lat);
  const auto& tau = bandwidths_.tau;
  return accumulate(lon, lat, [&](std::size_t p) {
    const double tp = std::min(tau[p], kMaxConcentration);
    return tp * (std::cos((hours - points_.hours[p]) * kHoursToRad) - 1.0) + log_time_norm_[p];
  });
}

double MixtureDensity::density(double lon, double lat, double hours) const {
  return std::exp(log_density(lon, lat, hours));
}

double MixtureDensity::log_spatial_density(double lon, double lat) const {
  return accumulate(lon, lat, [](std::size_t) { return 0.0; });
}

double MixtureDensity::log_weighted_spatial(double lon, double lat,
                                            std::span<const double> extra_log) const {
  if (extra_log.size() != points_.size()) {
    throw ArgumentError("log_weighted_spatial: one extra factor per point is required");
  }
  return accumulate(lon, lat, [&](std::size_t p) { return extra_log[p]; });
}

Bandwidths fixed_bandwidths(const ModelParams& params, std::size_t n_points) {
  Bandwidths bw;
  bw.h1.assign(n_points, 1.0 / params.alpha1);
  bw.h2.assign(n_points, 1.0 / params.alpha2);
  if (params.has_time) {
    bw.tau.assign(n_points, std::min(params.alpha3 * params.alpha3, kMaxConcentration));
  }
  return bw;
}

MixtureDensity preliminary_fixed_kde(const MixturePoints& points, const ModelParams& fixed_params) {
  if (points.size() == 0) throw FitError("preliminary_fixed_kde: history is empty");
  return MixtureDensity(points, fixed_params, fixed_bandwidths(fixed_params, points.size()));
}

LocalScales compute_local_scales(const MixturePoints& points, const MixtureDensity& pilot) {
  const std::size_t n = points.size();
  if (n == 0) throw FitError("compute_local_scales: no points");
  std::vector<double> log_f(n);
  parallel_for(n, [&](std::size_t p) {
    log_f[p] = pilot.has_time() ? pilot.log_density(points.lon[p], points.lat[p], points.hours[p])
                                : pilot.log_spatial_density(points.lon[p], points.lat[p]);
  });
  // G is taken over the historical points only, so adding an expert block
  // leaves the history scales untouched.
  std::size_t counted = 0;
  for (std::size_t p = 0; p < n; ++p) {
    if (points.slot_lag[static_cast<std::size_t>(points.slot[p])] != 0) ++counted;
  }
  const bool all_points = counted == 0;
  double sum = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    if (!std::isfinite(log_f[p])) {
      throw FitError("compute_local_scales: pilot density vanishes at point " + std::to_string(p) +
                     " (" + std::to_string(points.lon[p]) + ", " + std::to_string(points.lat[p]) +
                     ")");
    }
    if (all_points || points.slot_lag[static_cast<std::size_t>(points.slot[p])] != 0) sum += log_f[p];
  }
  const double log_g = sum / static_cast<double>(all_points ? n : counted);
  LocalScales scales;
  scales.G = std::exp(log_g);
  scales.A.resize(n);
  for (std::size_t p = 0; p < n; ++p) scales.A[p] = std::exp(log_f[p] - log_g);
  return scales;
}

Bandwidths adaptive_bandwidths(const ModelParams& params, const LocalScales& scales) {
  if (!(params.alpha1 > 0.0) || !(params.alpha2 > 0.0)) {
    throw ArgumentError("adaptive_bandwidths: alpha1 and alpha2 must be positive");
  }
  const std::size_t n = scales.A.size();
  Bandwidths bw;
  bw.h1.resize(n);
  bw.h2.resize(n);
  if (params.has_time) bw.tau.resize(n);
  std::size_t capped = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const double log_a = std::log(scales.A[p]);
    bw.h1[p] = std::exp(-std::log(params.alpha1) - params.beta1 * log_a);
    bw.h2[p] = std::exp(-std::log(params.alpha2) - params.beta2 * log_a);
    if (params.has_time) {
      double tau = 0.0;
      if (params.alpha3 > 0.0) tau = std::exp(2.0 * (std::log(params.alpha3) + params.beta3 * log_a));
      if (tau > kMaxConcentration) {
        tau = kMaxConcentration;
        ++capped;
      }
      bw.tau[p] = tau;
    }
  }
  if (capped > 0) {
    warn(std::to_string(capped) + " concentrations capped at " + std::to_string(kMaxConcentration));
  }
  return bw;
}

DensityValue mixture_density_at(double lon, double lat, double hours, const MixturePoints& points,
                                const ModelParams& params, const Bandwidths& bandwidths) {
  const MixtureDensity f(points, params, bandwidths);
  const double log_f = f.log_density(lon, lat, hours);
  return {std::exp(log_f), log_f};
}

}  // namespace hotspot
