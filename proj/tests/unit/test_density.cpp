#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "hotspot/bandwidth_rules.hpp"
#include "hotspot/density.hpp"
#include "hotspot/errors.hpp"
#include "oracles.hpp"

using namespace hotspot;

namespace {

MixturePoints cloud(std::size_t per_slot, int slots, std::uint64_t seed, bool expert = false) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 24.0);
  MixturePoints pts;
  for (int s = 0; s < slots; ++s) {
    std::vector<EventRecord> ev(per_slot + static_cast<std::size_t>(s));
    for (auto& e : ev) {
      e.lon = 77.2 + 0.01 * n(gen);
      e.lat = 28.6 + 0.008 * n(gen);
      e.time_of_day = u(gen);
    }
    pts.add_slot(ev, slots - s);
  }
  if (expert) {
    std::vector<EventRecord> ev(3);
    for (auto& e : ev) {
      e.lon = 77.2 + 0.01 * n(gen);
      e.lat = 28.6 + 0.01 * n(gen);
      e.time_of_day = 22.0;
    }
    pts.add_slot(ev, 0);
    pts.has_expert = true;
  }
  return pts;
}

ModelParams params_for(const MixturePoints& pts, bool has_time = true) {
  ModelParams p;
  p.alpha1 = 1.0 / 0.004;
  p.alpha2 = 1.0 / 0.003;
  p.beta1 = 0.5;
  p.beta2 = 0.3;
  p.alpha3 = has_time ? 1.2 : 0.0;
  p.beta3 = has_time ? 0.4 : 0.0;
  p.has_time = has_time;
  for (std::size_t s = 0; s < pts.slots(); ++s) p.weights.push_back(1.0 + static_cast<double>(s));
  double total = 0.0;
  for (double w : p.weights) total += w;
  for (double& w : p.weights) w /= total;
  return p;
}

LocalScales random_scales(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  LocalScales s;
  for (std::size_t k = 0; k < n; ++k) s.A.push_back(u(gen));
  return s;
}

}  // namespace

TEST(ModelParams, ValidateCatchesInvariants) {
  ModelParams p;
  p.weights = {0.5, 0.5};
  EXPECT_NO_THROW(p.validate());
  auto bad = p;
  bad.weights = {0.7, 0.7};
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = p;
  bad.beta1 = 1.0;
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = p;
  bad.alpha2 = 0.0;
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = p;
  bad.weights = {};
  EXPECT_THROW(bad.validate(), ArgumentError);
}

TEST(MixturePoints, EmptyBlocksAreDroppedAndRecorded) {
  BlockedDataset b;
  b.historical.resize(3);
  b.historical[0].events.resize(2);
  b.historical[2].events.resize(1);
  TemporalBlock e;
  e.is_expert = true;
  e.events.resize(4);
  b.expert = e;
  const auto pts = MixturePoints::from_blocks(b);
  EXPECT_EQ(pts.slots(), 3u);
  EXPECT_EQ(pts.slot_lag, (std::vector<int>{3, 1, 0}));
  EXPECT_EQ(pts.dropped_lags, (std::vector<int>{2}));
  EXPECT_TRUE(pts.has_expert);
  EXPECT_EQ(MixturePoints::from_blocks(b, false).slots(), 2u);
}

TEST(LogSumExp, HandlesInfinitiesAndLargeValues) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(log_sum_exp(std::vector<double>{}), -inf);
  EXPECT_EQ(log_sum_exp(std::vector<double>{-inf, -inf}), -inf);
  EXPECT_NEAR(log_sum_exp(std::vector<double>{1000.0, 1000.0}), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_NEAR(log_sum_exp(std::vector<double>{-inf, 0.0}), 0.0, 1e-15);
}

TEST(MixtureDensity, MatchesDirectSum) {
  const auto pts = cloud(12, 3, 1);
  const auto p = params_for(pts);
  const auto bw = adaptive_bandwidths(p, random_scales(pts.size(), 2));
  const MixtureDensity f(pts, p, bw);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double lon = 77.2 + 0.015 * n(gen);
    const double lat = 28.6 + 0.012 * n(gen);
    const double t = std::fmod(std::abs(12.0 + 6.0 * n(gen)), 24.0);
    const double expect = oracle::mixture_density(pts, p.weights, bw, lon, lat, t, true);
    EXPECT_NEAR(f.density(lon, lat, t), expect, 1e-10 * expect);
    EXPECT_NEAR(f.log_density(lon, lat, t), std::log(expect), 1e-10);
  }
}

TEST(MixtureDensity, SpatialOnlyIgnoresTime) {
  const auto pts = cloud(10, 2, 4);
  const auto p = params_for(pts, false);
  const auto bw = adaptive_bandwidths(p, random_scales(pts.size(), 5));
  EXPECT_TRUE(bw.tau.empty());
  const MixtureDensity f(pts, p, bw);
  const double a = f.density(77.2, 28.6, 3.0);
  EXPECT_EQ(a, f.density(77.2, 28.6, 17.0));
  EXPECT_NEAR(a, oracle::mixture_density(pts, p.weights, bw, 77.2, 28.6, 0.0, false), 1e-10 * a);
  EXPECT_NEAR(f.log_spatial_density(77.2, 28.6), std::log(a), 1e-12);
}

TEST(MixtureDensity, TimeMarginalEqualsSpatialDensity) {
  const auto pts = cloud(8, 2, 6);
  const auto p = params_for(pts);
  const auto bw = adaptive_bandwidths(p, random_scales(pts.size(), 7));
  const MixtureDensity f(pts, p, bw);
  const int steps = 96;
  double s = 0.0;
  for (int k = 0; k < steps; ++k) s += f.density(77.201, 28.599, 24.0 * (k + 0.5) / steps) * 24.0 / steps;
  EXPECT_NEAR(s, std::exp(f.log_spatial_density(77.201, 28.599)), 1e-9 * s);
}

TEST(MixtureDensity, IntegratesToOneByQuadrature) {
  const auto pts = cloud(20, 3, 8);
  const auto p = params_for(pts);
  const auto bw = adaptive_bandwidths(p, random_scales(pts.size(), 9));
  const MixtureDensity f(pts, p, bw, EvalOptions{true});
  double h_min = 1e9;
  double h_max = 0.0;
  double lo_x = 1e9, hi_x = -1e9, lo_y = 1e9, hi_y = -1e9;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    h_min = std::min({h_min, bw.h1[k], bw.h2[k]});
    h_max = std::max({h_max, bw.h1[k], bw.h2[k]});
    lo_x = std::min(lo_x, pts.lon[k]);
    hi_x = std::max(hi_x, pts.lon[k]);
    lo_y = std::min(lo_y, pts.lat[k]);
    hi_y = std::max(hi_y, pts.lat[k]);
  }
  const double pad = 9.0 * h_max;
  const double step = 0.5 * h_min;
  const int nx = static_cast<int>(std::ceil((hi_x - lo_x + 2 * pad) / step));
  const int ny = static_cast<int>(std::ceil((hi_y - lo_y + 2 * pad) / step));
  const int nt = 48;
  double total = 0.0;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double x = lo_x - pad + (i + 0.5) * step;
      const double y = lo_y - pad + (j + 0.5) * step;
      for (int k = 0; k < nt; ++k) total += f.density(x, y, 24.0 * (k + 0.5) / nt);
    }
  }
  total *= step * step * 24.0 / nt;
  EXPECT_NEAR(total, 1.0, 1e-3);
}

TEST(MixtureDensity, PruningStaysWithinTheBound) {
  const auto pts = cloud(40, 3, 10);
  const auto p = params_for(pts);
  const auto bw = adaptive_bandwidths(p, random_scales(pts.size(), 11));
  const MixtureDensity exact(pts, p, bw);
  const MixtureDensity fast(pts, p, bw, EvalOptions{true});
  std::mt19937_64 gen(12);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double lon = 77.2 + 0.02 * n(gen);
    const double lat = 28.6 + 0.02 * n(gen);
    const double a = exact.density(lon, lat, 20.0);
    const double b = fast.density(lon, lat, 20.0);
    EXPECT_LE(b, a * (1.0 + 1e-12));
    // Each skipped term is below exp(-18) of its own peak.
    double peak_sum = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const auto slot = static_cast<std::size_t>(pts.slot[q]);
      peak_sum += p.weights[slot] / static_cast<double>(pts.slot_size[slot]) /
                  (2.0 * std::numbers::pi * bw.h1[q] * bw.h2[q]) * oracle::von_mises(0.0, bw.tau[q]);
    }
    EXPECT_LE(a - b, std::exp(-18.0) * peak_sum);
  }
}

TEST(MixtureDensity, WeightedSpatialWithZeroExtrasIsSpatial) {
  const auto pts = cloud(10, 2, 13);
  const auto p = params_for(pts);
  const auto bw = adaptive_bandwidths(p, random_scales(pts.size(), 14));
  const MixtureDensity f(pts, p, bw);
  std::vector<double> zero(pts.size(), 0.0);
  EXPECT_NEAR(f.log_weighted_spatial(77.2, 28.6, zero), f.log_spatial_density(77.2, 28.6), 1e-12);
  std::vector<double> drop(pts.size(), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(f.log_weighted_spatial(77.2, 28.6, drop), -std::numeric_limits<double>::infinity());
  EXPECT_THROW(f.log_weighted_spatial(77.2, 28.6, std::vector<double>(3, 0.0)), ArgumentError);
}

TEST(MixtureDensity, RejectsMismatchedInputs) {
  const auto pts = cloud(5, 2, 15);
  auto p = params_for(pts);
  const auto bw = fixed_bandwidths(p, pts.size());
  p.weights = {1.0};
  EXPECT_THROW(MixtureDensity(pts, p, bw), ArgumentError);
  auto q = params_for(pts);
  auto short_bw = bw;
  short_bw.h1.pop_back();
  EXPECT_THROW(MixtureDensity(pts, q, short_bw), ArgumentError);
}

TEST(AdaptiveBandwidths, FollowTheScaleLaw) {
  const auto pts = cloud(6, 1, 16);
  const auto p = params_for(pts);
  const auto s = random_scales(pts.size(), 17);
  const auto bw = adaptive_bandwidths(p, s);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    EXPECT_NEAR(bw.h1[k], 1.0 / (p.alpha1 * std::pow(s.A[k], p.beta1)), 1e-15);
    EXPECT_NEAR(bw.h2[k], 1.0 / (p.alpha2 * std::pow(s.A[k], p.beta2)), 1e-15);
    EXPECT_NEAR(bw.tau[k], std::pow(p.alpha3 * std::pow(s.A[k], p.beta3), 2), 1e-12);
  }
  const auto fixed = fixed_bandwidths(p, 3);
  EXPECT_EQ(fixed.h1, std::vector<double>(3, 1.0 / p.alpha1));
  EXPECT_NEAR(fixed.tau[0], p.alpha3 * p.alpha3, 1e-15);
}

TEST(LocalScales, GeometricMeanOverHistoryOnly) {
  const auto hist = cloud(15, 2, 18);
  const auto with_expert = cloud(15, 2, 18, true);
  const auto p = params_for(hist);
  const MixtureDensity pilot = preliminary_fixed_kde(hist, p);
  const auto s_hist = compute_local_scales(hist, pilot);
  const auto s_exp = compute_local_scales(with_expert, pilot);
  EXPECT_NEAR(s_hist.G, s_exp.G, 1e-12 * s_hist.G);
  for (std::size_t k = 0; k < hist.size(); ++k) EXPECT_NEAR(s_hist.A[k], s_exp.A[k], 1e-12);
  double log_mean = 0.0;
  for (double a : s_hist.A) log_mean += std::log(a);
  EXPECT_NEAR(log_mean / static_cast<double>(hist.size()), 0.0, 1e-12);
  for (std::size_t k = 0; k < hist.size(); ++k) {
    EXPECT_NEAR(s_hist.A[k] * s_hist.G, pilot.density(hist.lon[k], hist.lat[k], hist.hours[k]),
                1e-9 * s_hist.A[k] * s_hist.G);
  }
}

TEST(PruningIndex, FindsExactlyThePointsInRange) {
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(300), y(300), r(300);
  for (int k = 0; k < 300; ++k) {
    x[k] = u(gen);
    y[k] = u(gen);
    r[k] = 0.01 + 0.2 * u(gen) * u(gen);
  }
  const PruningIndex index(x, y, r);
  for (int q = 0; q < 50; ++q) {
    const double qx = u(gen);
    const double qy = u(gen);
    std::set<std::size_t> found;
    index.for_each_near(qx, qy, [&](std::size_t k) { found.insert(k); });
    for (std::size_t k = 0; k < 300; ++k) {
      const bool near = std::hypot(qx - x[k], qy - y[k]) <= r[k];
      EXPECT_EQ(found.count(k) == 1, near) << k;
    }
  }
}

TEST(Silverman, MatchesHandComputation) {
  const std::vector<double> v{1.0, 2.0, 4.0, 7.0, 11.0};
  // sd = sqrt(14.5) = 3.8079; IQR (type 7) = 7 - 2 = 5 -> 3.7313; n^-1/5 = 0.72478
  const double expect = 0.9 * std::min(std::sqrt(14.5), 5.0 / 1.34) * std::pow(5.0, -0.2);
  EXPECT_NEAR(silverman_bandwidth(v), expect, 1e-12);
  const std::vector<double> flat_iqr{0.0, 5.0, 5.0, 5.0, 5.0, 5.0, 10.0};
  EXPECT_GT(silverman_bandwidth(flat_iqr), 0.0);
  EXPECT_THROW(silverman_bandwidth(std::vector<double>{1.0}), ArgumentError);
}

TEST(Silverman, CircularSdAndSrot) {
  const std::vector<double> same{5.0, 5.0, 5.0};
  EXPECT_NEAR(circular_sd_hours(same), 0.0, 1e-7);
  const std::vector<double> spread{1.0, 3.0};
  // Two angles pi/6 apart: R = cos(pi/12).
  EXPECT_NEAR(circular_sd_hours(spread), std::sqrt(-2.0 * std::log(std::cos(std::numbers::pi / 12.0))), 1e-12);

  const auto pts = cloud(30, 2, 20);
  const auto s = srot_bandwidths(pts);
  EXPECT_NEAR(s.h1, silverman_bandwidth(pts.lon), 1e-15);
  const double h3 = 0.9 * 24.0 / (2.0 * std::numbers::pi) * circular_sd_hours(pts.hours) *
                    std::pow(static_cast<double>(pts.size()), -0.2);
  EXPECT_NEAR(s.h3, h3, 1e-12);
  EXPECT_NEAR(s.tau, 1.0 / (h3 * h3), 1e-9);

  const auto a = abramson_params(s, {0.5, 0.5});
  EXPECT_NEAR(1.0 / a.alpha1, s.h1, 1e-15);
  EXPECT_EQ(a.beta1, 0.5);
  LocalScales ones;
  ones.A.assign(pts.size(), 1.0);
  const auto bw = abramson_adaptive(s, ones);
  EXPECT_NEAR(bw.h1[0], s.h1, 1e-15);
  EXPECT_NEAR(bw.tau[0], s.tau, 1e-9);
}

TEST(Silverman, DegenerateInputsThrow) {
  MixturePoints one;
  std::vector<EventRecord> ev(1);
  one.add_slot(ev, 1);
  EXPECT_THROW(srot_bandwidths(one), ArgumentError);
  MixturePoints stacked;
  std::vector<EventRecord> ev2(3);
  for (auto& e : ev2) {
    e.lon = 77.2;
    e.lat = 28.6;
  }
  ev2[0].time_of_day = 1.0;
  stacked.add_slot(ev2, 1);
  EXPECT_THROW(srot_bandwidths(stacked), ArgumentError);
}
