#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "hotspot/data_model.hpp"

namespace hotspot {

// Theta = (alpha1, beta1, alpha2, beta2, alpha3, beta3, w_1..w_B[, w_E]).
// alpha1/alpha2 are inverse-degree scales, alpha3 is an inverse-hour scale.
// Spatial-only models (has_time == false) carry no alpha3/beta3.
struct ModelParams {
  double alpha1 = 1.0;
  double beta1 = 0.0;
  double alpha2 = 1.0;
  double beta2 = 0.0;
  double alpha3 = 0.0;
  double beta3 = 0.0;
  bool has_time = true;
  std::vector<double> weights;

  // Throws ArgumentError when an invariant fails (weights off the simplex,
  // non-positive alpha, beta outside [0, 1)).
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// The support of the block-weighted mixture, flattened. Each point belongs to
// a weight slot; slots are the non-empty historical blocks oldest first,
// followed by the expert block when present.
struct MixturePoints {
  std::vector<double> lon;
  std::vector<double> lat;
  std::vector<double> hours;
  std::vector<int> slot;
  std::vector<std::size_t> slot_size;
  // Weeks before the target block for history slots (B .. 1), 0 for expert.
  std::vector<int> slot_lag;
  std::vector<int> dropped_lags;  // empty historical blocks that were removed
  bool has_expert = false;

  std::size_t size() const { return lon.size(); }
  std::size_t slots() const { return slot_size.size(); }

  // Empty historical blocks are dropped and recorded in dropped_lags.
  static MixturePoints from_blocks(const BlockedDataset& blocked, bool include_expert = true);
  void add_slot(std::span<const EventRecord> events, int lag);
};

struct LocalScales {
  std::vector<double> A;
  double G = 1.0;  // geometric mean of the pilot density over the points
};

struct Bandwidths {
  std::vector<double> h1;   // degrees longitude
  std::vector<double> h2;   // degrees latitude
  std::vector<double> tau;  // von Mises concentration; empty for spatial-only
};

struct EvalOptions {
  // Skip terms farther than 6 * max(h1, h2) from the evaluation point. Each
  // skipped term is below exp(-18) of its peak.
  bool fast_eval = false;
};

inline constexpr double kPruneRadiusBandwidths = 6.0;

// Finds points whose own radius covers a query location. Points are grouped
// into radius classes (powers of two); each class is sorted by longitude.
class PruningIndex {
 public:
  PruningIndex() = default;
  PruningIndex(std::span<const double> lon, std::span<const double> lat,
               std::span<const double> radius);

  // Visits, in a fixed order, every point p with dist(query, p) <= radius[p].
  template <typename Visit>
  void for_each_near(double lon, double lat, Visit&& visit) const {
    for (const auto& level : levels_) {
      auto first = std::lower_bound(level.lon.begin(), level.lon.end(), lon - level.max_radius);
      for (auto k = static_cast<std::size_t>(first - level.lon.begin()); k < level.lon.size(); ++k) {
        const double dx = lon - level.lon[k];
        if (-dx > level.max_radius) break;
        const double dy = lat - level.lat[k];
        if (dx * dx + dy * dy <= level.radius_sq[k]) visit(level.index[k]);
      }
    }
  }

  bool empty() const { return levels_.empty(); }

 private:
  struct Level {
    double max_radius = 0.0;
    std::vector<double> lon;  // sorted ascending
    std::vector<double> lat;
    std::vector<double> radius_sq;
    std::vector<std::size_t> index;
  };
  std::vector<Level> levels_;
};

// Evaluator of the block-weighted adaptive mixture
//   f(x, y, t) = sum_i w_i / n_i sum_j N(x; x_ij, h1) N(y; y_ij, h2) vM(t - t_ij; tau)
// Immutable after construction; evaluation is thread-safe. All sums are taken
// in log space with a single exponentiation per evaluation.
class MixtureDensity {
 public:
  MixtureDensity(MixturePoints points, ModelParams params, Bandwidths bandwidths,
                 EvalOptions options = {});

  double log_density(double lon, double lat, double hours) const;
  double density(double lon, double lat, double hours) const;
  // Time integrated out: sum_i w_i / n_i sum_j N N.
  double log_spatial_density(double lon, double lat) const;
  // log sum_p exp(extra_log[p]) * (w/n) N N; extra_log has one entry per point
  // (use -inf to drop a point).
  double log_weighted_spatial(double lon, double lat, std::span<const double> extra_log) const;

  const MixturePoints& points() const { return points_; }
  const ModelParams& params() const { return params_; }
  const Bandwidths& bandwidths() const { return bandwidths_; }
  bool has_time() const { return params_.has_time; }
  // log(w_slot / n_slot) per point; -inf for zero-weight slots.
  const std::vector<double>& log_point_weight() const { return log_point_weight_; }

 private:
  template <typename Extra>
  double accumulate(double lon, double lat, Extra&& extra) const;

  MixturePoints points_;
  ModelParams params_;
  Bandwidths bandwidths_;
  EvalOptions options_;
  std::vector<double> log_point_weight_;
  std::vector<double> log_spatial_coef_;  // log(w/n) - log h1 - log h2 - log(2 pi)
  std::vector<double> half_inv_h1_sq_;
  std::vector<double> half_inv_h2_sq_;
  std::vector<double> log_time_norm_;  // -log 24 - log I0e(tau)
  std::vector<double> prune_radius_;
  PruningIndex index_;
};

// Bandwidths for fixed parameters (all A = 1): h = 1/alpha, tau = alpha3^2.
Bandwidths fixed_bandwidths(const ModelParams& params, std::size_t n_points);

// Pilot density with constant bandwidths taken from `fixed_params`.
MixtureDensity preliminary_fixed_kde(const MixturePoints& points, const ModelParams& fixed_params);

// A = f_p(point) / G with G the geometric mean of f_p over the historical
// points (expert points get a scale but do not enter G).
// Spatial-only pilots are evaluated without the time coordinate.
LocalScales compute_local_scales(const MixturePoints& points, const MixtureDensity& pilot);

// h1 = 1/(alpha1 A^beta1), h2 = 1/(alpha2 A^beta2), tau = (alpha3 A^beta3)^2.
Bandwidths adaptive_bandwidths(const ModelParams& params, const LocalScales& scales);

struct DensityValue {
  double density = 0.0;
  double log_density = 0.0;
};

DensityValue mixture_density_at(double lon, double lat, double hours, const MixturePoints& points,
                                const ModelParams& params, const Bandwidths& bandwidths);

// log sum exp over a buffer, returning -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> values);

}  // namespace hotspot
