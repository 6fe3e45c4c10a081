#pragma once

#include <span>

#include "hotspot/density.hpp"

namespace hotspot {

// Silverman's rule of thumb on the pooled history.
struct SrotBandwidths {
  double h1 = 0.0;   // degrees longitude
  double h2 = 0.0;   // degrees latitude
  double h3 = 0.0;   // hours
  double tau = 0.0;  // 1 / h3^2
};

// 0.9 * min(sd, IQR / 1.34) * n^(-1/5). Sample sd (n - 1); IQR from type-7
// quantiles.
double silverman_bandwidth(std::span<const double> values);

// Circular standard deviation sqrt(-2 log R) of the angles 2*pi*t/24, in radians.
double circular_sd_hours(std::span<const double> hours);

// Throws ArgumentError when fewer than two points are pooled or a bandwidth
// degenerates to zero. With has_time == false, h3 and tau are left at 0.
SrotBandwidths srot_bandwidths(const MixturePoints& points, bool has_time = true);
SrotBandwidths srot_bandwidths(const BlockedDataset& blocked, bool has_time = true);

// Abramson: beta = 0.5 on every axis and alpha = 1/h so that A = 1 gives back
// the SROT bandwidths.
ModelParams abramson_params(const SrotBandwidths& srot, std::vector<double> weights,
                            bool has_time = true);
Bandwidths abramson_adaptive(const SrotBandwidths& srot, const LocalScales& scales,
                             bool has_time = true);

}  // namespace hotspot
