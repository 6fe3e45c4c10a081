#include "hotspot/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "hotspot/bandwidth_rules.hpp"
#include "hotspot/diagnostics.hpp"
#include "hotspot/digest.hpp"
#include "hotspot/errors.hpp"
#include "hotspot/kernels.hpp"
#include "hotspot/parallel.hpp"

namespace hotspot {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kHoursToRad = std::numbers::pi / 12.0;
constexpr double kRateFloor = 1e-12;
constexpr std::uint64_t kInitSweep = ~0ULL;
// Atoms further than this below the mode of a unimodal grid conditional carry
// less than exp(-50) each and are skipped.
constexpr double kGridWindow = 50.0;
constexpr std::size_t kFullGridAtoms = 64;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);
const double kLog24 = std::log(24.0);

// Per-candidate pieces of the Step 8 factor for one parameter value.
struct CandidateTerms {
  std::vector<double> coef;  // log(w/n) + log(alpha1 A^b1) + log(alpha2 A^b2) - log 2pi [+ time norm]
  std::vector<double> q1;    // alpha1^2 A^(2 b1) / 2
  std::vector<double> q2;
  std::vector<double> tau;
  std::vector<double> cand_cos;
  std::vector<double> cand_sin;
  bool has_time = true;

  CandidateTerms(const GibbsData& data, const ModelParams& p) : has_time(data.has_time) {
    const auto& pts = data.candidates;
    const std::size_t m = pts.size();
    if (p.weights.size() != pts.slots()) {
      throw ArgumentError("weights length " + std::to_string(p.weights.size()) + " does not match " +
                          std::to_string(pts.slots()) + " slots");
    }
    std::vector<double> log_wn(pts.slots());
    for (std::size_t s = 0; s < pts.slots(); ++s) {
      log_wn[s] = p.weights[s] > 0.0
                      ? std::log(p.weights[s]) - std::log(static_cast<double>(pts.slot_size[s]))
                      : kNegInf;
    }
    const double la1 = std::log(p.alpha1);
    const double la2 = std::log(p.alpha2);
    coef.resize(m);
    q1.resize(m);
    q2.resize(m);
    if (has_time) {
      tau.resize(m);
      cand_cos.resize(m);
      cand_sin.resize(m);
    }
    for (std::size_t c = 0; c < m; ++c) {
      const double la = data.log_A[c];
      const double l1 = la1 + p.beta1 * la;
      const double l2 = la2 + p.beta2 * la;
      coef[c] = log_wn[static_cast<std::size_t>(pts.slot[c])] + l1 + l2 - kLog2Pi;
      q1[c] = 0.5 * std::exp(2.0 * l1);
      q2[c] = 0.5 * std::exp(2.0 * l2);
      if (has_time) {
        const double t = p.alpha3 > 0.0 ? std::exp(2.0 * (std::log(p.alpha3) + p.beta3 * la)) : 0.0;
        tau[c] = t;
        coef[c] += -kLog24 - log_bessel_i0_scaled(t);
        cand_cos[c] = std::cos(pts.hours[c] * kHoursToRad);
        cand_sin[c] = std::sin(pts.hours[c] * kHoursToRad);
      }
    }
  }

  double log_weight(const GibbsData& data, std::size_t l, double ec, double es, std::size_t c) const {
    const double dx = data.lon[l] - data.candidates.lon[c];
    const double dy = data.lat[l] - data.candidates.lat[c];
    double v = coef[c] - q1[c] * dx * dx - q2[c] * dy * dy;
    if (has_time) v += tau[c] * (ec * cand_cos[c] + es * cand_sin[c] - 1.0);
    return v;
  }
};

double event_cos(const GibbsData& d, std::size_t l) { return std::cos(d.hours[l] * kHoursToRad); }
double event_sin(const GibbsData& d, std::size_t l) { return std::sin(d.hours[l] * kHoursToRad); }

double nearest_atom(std::span<const double> grid, double target) {
  double best = grid.front();
  for (double g : grid) {
    if (std::abs(g - target) < std::abs(best - target)) best = g;
  }
  return best;
}

double gamma_draw(double shape, Rng& rng) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(rng);
}

}  // namespace

PriorGrids PriorGrids::standard() {
  return {arithmetic(0.0, 0.01, 100), arithmetic(0.0, 0.01, 1001)};
}

std::vector<double> PriorGrids::arithmetic(double first, double step, std::size_t count) {
  std::vector<double> g(count);
  for (std::size_t k = 0; k < count; ++k) g[k] = first + step * static_cast<double>(k);
  return g;
}

GibbsData GibbsData::make(MixturePoints candidates, std::span<const EventRecord> training,
                          const LocalScales* scales, bool has_time) {
  GibbsData d;
  d.has_time = has_time;
  d.log_A.assign(candidates.size(), 0.0);
  if (scales != nullptr) {
    if (scales->A.size() != candidates.size()) {
      throw ArgumentError("GibbsData: scales do not match candidates");
    }
    for (std::size_t c = 0; c < candidates.size(); ++c) d.log_A[c] = std::log(scales->A[c]);
  }
  d.candidates = std::move(candidates);
  for (const auto& e : training) {
    d.lon.push_back(e.lon);
    d.lat.push_back(e.lat);
    d.hours.push_back(e.time_of_day);
  }
  return d;
}

std::size_t sample_log_categorical(std::span<const double> log_w, Rng& rng) {
  double mx = kNegInf;
  for (double v : log_w) mx = std::max(mx, v);
  if (!(mx > kNegInf) || !std::isfinite(mx)) {
    throw InferenceError("categorical draw with no finite log-weight");
  }
  double total = 0.0;
  for (double v : log_w) total += std::exp(v - mx);
  double u = rng.uniform() * total;
  std::size_t last = 0;
  for (std::size_t k = 0; k < log_w.size(); ++k) {
    const double p = std::exp(log_w[k] - mx);
    if (p <= 0.0) continue;
    last = k;
    if (u < p) return k;
    u -= p;
  }
  return last;
}

GibbsSampler::GibbsSampler(const GibbsData& data, GibbsOptions options)
    : data_(data), options_(std::move(options)) {
  if (data_.candidates.size() == 0) throw FitError("Gibbs sampler: no candidate points");
  if (options_.grids.beta.empty() || (data_.has_time && options_.grids.alpha3.empty())) {
    throw ArgumentError("Gibbs sampler: empty grid");
  }
  if (options_.schedule.warmup < 0 || options_.schedule.samples < 1) {
    throw ArgumentError("Gibbs sampler: schedule needs warmup >= 0 and samples >= 1");
  }
  const std::size_t n = data_.n();
  event_cos_.resize(n);
  event_sin_.resize(n);
  for (std::size_t l = 0; l < n; ++l) {
    event_cos_[l] = event_cos(data_, l);
    event_sin_[l] = event_sin(data_, l);
  }
  const std::size_t m = data_.candidates.size();
  cand_cos_.resize(m);
  cand_sin_.resize(m);
  for (std::size_t c = 0; c < m; ++c) {
    cand_cos_[c] = std::cos(data_.candidates.hours[c] * kHoursToRad);
    cand_sin_[c] = std::sin(data_.candidates.hours[c] * kHoursToRad);
  }
}

Rng GibbsSampler::step_rng(std::uint64_t sweep, std::uint64_t step) const {
  return Rng::stream({options_.seed, static_cast<std::uint64_t>(options_.chain), sweep, step});
}

void GibbsSampler::set_state(GibbsState state) {
  if (state.assignment.size() != data_.n()) {
    throw ArgumentError("GibbsState: one assignment per training event required");
  }
  for (auto a : state.assignment) {
    if (a >= data_.candidates.size()) throw ArgumentError("GibbsState: assignment out of range");
  }
  if (state.params.weights.size() != data_.candidates.slots()) {
    throw ArgumentError("GibbsState: weights do not match slots");
  }
  state.params.has_time = data_.has_time;
  state_ = std::move(state);
  refresh_assigned();
}

void GibbsSampler::initialize() {
  ModelParams p;
  p.has_time = data_.has_time;
  try {
    const SrotBandwidths srot = srot_bandwidths(data_.candidates, data_.has_time);
    p.alpha1 = 1.0 / srot.h1;
    p.alpha2 = 1.0 / srot.h2;
    if (data_.has_time) p.alpha3 = 1.0 / srot.h3;
  } catch (const ArgumentError& e) {
    warn(std::string("Gibbs initialisation falls back to unit scales: ") + e.what());
    p.alpha1 = 100.0;
    p.alpha2 = 100.0;
    p.alpha3 = 1.0;
  }
  p.beta1 = nearest_atom(options_.grids.beta, 0.5);
  p.beta2 = p.beta1;
  if (data_.has_time) {
    p.alpha3 = nearest_atom(options_.grids.alpha3, std::clamp(p.alpha3, 0.01, 10.0));
    p.beta3 = p.beta1;
  } else {
    p.alpha3 = 0.0;
    p.beta3 = 0.0;
  }
  const std::size_t slots = data_.candidates.slots();
  p.weights.assign(slots, 1.0 / static_cast<double>(slots));

  // Assignments from the prior: slot by weight, point uniformly within it.
  std::vector<std::size_t> slot_begin(slots + 1, 0);
  for (std::size_t s = 0; s < slots; ++s) slot_begin[s + 1] = slot_begin[s] + data_.candidates.slot_size[s];
  GibbsState st;
  st.params = p;
  st.assignment.resize(data_.n());
  Rng rng = step_rng(kInitSweep, 0);
  for (auto& a : st.assignment) {
    const auto s = static_cast<std::size_t>(rng.uniform() * static_cast<double>(slots));
    const std::size_t size = data_.candidates.slot_size[std::min(s, slots - 1)];
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(size));
    a = static_cast<std::uint32_t>(slot_begin[std::min(s, slots - 1)] + std::min(j, size - 1));
  }
  state_ = std::move(st);
  refresh_assigned();
}

void GibbsSampler::refresh_assigned() {
  const std::size_t n = data_.n();
  d1_sq_.resize(n);
  d2_sq_.resize(n);
  log_a_.resize(n);
  cos_dt_.resize(n);
  for (std::size_t l = 0; l < n; ++l) {
    const std::size_t c = state_.assignment[l];
    const double dx = data_.lon[l] - data_.candidates.lon[c];
    const double dy = data_.lat[l] - data_.candidates.lat[c];
    d1_sq_[l] = dx * dx;
    d2_sq_[l] = dy * dy;
    log_a_[l] = data_.log_A[c];
    cos_dt_[l] = event_cos_[l] * cand_cos_[c] + event_sin_[l] * cand_sin_[c];
  }
}

double GibbsSampler::alpha_shape() const { return static_cast<double>(data_.n()) / 2.0 + 1.0; }

double GibbsSampler::alpha_rate(int dim, double beta) const {
  const auto& d_sq = dim == 1 ? d1_sq_ : d2_sq_;
  double rate = 0.0;
  for (std::size_t l = 0; l < d_sq.size(); ++l) rate += d_sq[l] * std::exp(2.0 * beta * log_a_[l]);
  return 0.5 * rate;
}

double GibbsSampler::sample_alpha_spatial(int dim, Rng& rng) const {
  if (dim != 1 && dim != 2) throw ArgumentError("sample_alpha_spatial: dim must be 1 or 2");
  const double beta = dim == 1 ? state_.params.beta1 : state_.params.beta2;
  double rate = alpha_rate(dim, beta);
  if (!(rate > 0.0)) {
    warn("alpha" + std::to_string(dim) + " conditional degenerate: all squared distances are zero");
    rate = kRateFloor;
  }
  return std::sqrt(gamma_draw(alpha_shape(), rng) / rate);
}

std::vector<double> GibbsSampler::beta_log_conditional(int dim, std::span<const double> grid) const {
  const std::size_t n = data_.n();
  std::vector<double> out(grid.size(), 0.0);
  if (dim == 1 || dim == 2) {
    const auto& d_sq = dim == 1 ? d1_sq_ : d2_sq_;
    const double alpha = dim == 1 ? state_.params.alpha1 : state_.params.alpha2;
    double sum_log_a = 0.0;
    for (std::size_t l = 0; l < n; ++l) sum_log_a += log_a_[l];
    for (std::size_t k = 0; k < grid.size(); ++k) {
      double quad = 0.0;
      for (std::size_t l = 0; l < n; ++l) quad += d_sq[l] * std::exp(2.0 * grid[k] * log_a_[l]);
      out[k] = grid[k] * sum_log_a - 0.5 * alpha * alpha * quad;
    }
    return out;
  }
  if (dim != 3) throw ArgumentError("beta_log_conditional: dim must be 1, 2 or 3");
  const double a3_sq = state_.params.alpha3 * state_.params.alpha3;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double v = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      const double tau = a3_sq * std::exp(2.0 * grid[k] * log_a_[l]);
      v += tau * (cos_dt_[l] - 1.0) - log_bessel_i0_scaled(tau);
    }
    out[k] = v;
  }
  return out;
}

std::vector<double> GibbsSampler::alpha3_log_conditional(std::span<const double> grid) const {
  const std::size_t n = data_.n();
  std::vector<double> scale(n);
  for (std::size_t l = 0; l < n; ++l) scale[l] = std::exp(2.0 * state_.params.beta3 * log_a_[l]);
  std::vector<double> out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double a_sq = grid[k] * grid[k];
    double v = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      const double tau = a_sq * scale[l];
      v += tau * (cos_dt_[l] - 1.0) - log_bessel_i0_scaled(tau);
    }
    out[k] = v;
  }
  return out;
}

double GibbsSampler::sample_beta_grid(int dim, Rng& rng) const {
  const auto& grid = options_.grids.beta;
  const auto lw = beta_log_conditional(dim, grid);
  return grid[sample_log_categorical(lw, rng)];
}

double GibbsSampler::sample_alpha3_grid(Rng& rng) const {
  const auto& grid = options_.grids.alpha3;
  if (grid.size() <= kFullGridAtoms) {
    return grid[sample_log_categorical(alpha3_log_conditional(grid), rng)];
  }
  // The conditional is concave in alpha3^2, hence unimodal along the sorted
  // grid: locate the mode by bisection and expand while atoms still matter.
  const std::size_t n = data_.n();
  std::vector<double> scale(n);
  for (std::size_t l = 0; l < n; ++l) scale[l] = std::exp(2.0 * state_.params.beta3 * log_a_[l]);
  std::vector<double> cache(grid.size(), std::numeric_limits<double>::quiet_NaN());
  auto value = [&](std::size_t k) {
    if (std::isnan(cache[k])) {
      const double a_sq = grid[k] * grid[k];
      double v = 0.0;
      for (std::size_t l = 0; l < n; ++l) {
        const double tau = a_sq * scale[l];
        v += tau * (cos_dt_[l] - 1.0) - log_bessel_i0_scaled(tau);
      }
      cache[k] = v;
    }
    return cache[k];
  };
  std::size_t lo = 0;
  std::size_t hi = grid.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (value(mid) < value(mid + 1)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  const double peak = value(lo);
  std::size_t first = lo;
  while (first > 0 && value(first - 1) > peak - kGridWindow) --first;
  std::size_t last = lo;
  while (last + 1 < grid.size() && value(last + 1) > peak - kGridWindow) ++last;
  std::vector<double> lw(cache.begin() + static_cast<std::ptrdiff_t>(first),
                         cache.begin() + static_cast<std::ptrdiff_t>(last) + 1);
  return grid[first + sample_log_categorical(lw, rng)];
}

std::vector<std::size_t> GibbsSampler::slot_counts() const {
  std::vector<std::size_t> f(data_.candidates.slots(), 0);
  for (auto a : state_.assignment) ++f[static_cast<std::size_t>(data_.candidates.slot[a])];
  return f;
}

std::vector<double> GibbsSampler::sample_weights(Rng& rng) const {
  const auto f = slot_counts();
  std::vector<double> w(f.size());
  double total = 0.0;
  for (std::size_t s = 0; s < f.size(); ++s) {
    w[s] = gamma_draw(1.0 + static_cast<double>(f[s]), rng);
    total += w[s];
  }
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> GibbsSampler::assignment_log_weights(std::size_t l) const {
  const CandidateTerms terms(data_, state_.params);
  std::vector<double> out(data_.candidates.size());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = terms.log_weight(data_, l, event_cos_[l], event_sin_[l], c);
  }
  return out;
}

double GibbsSampler::sample_assignments(std::uint64_t sweep) {
  const CandidateTerms terms(data_, state_.params);
  const std::size_t n = data_.n();
  const std::size_t m = data_.candidates.size();

  PruningIndex index;
  if (options_.prune_assignments) {
    std::vector<double> radius(m);
    for (std::size_t c = 0; c < m; ++c) {
      const double h1 = 1.0 / std::sqrt(2.0 * terms.q1[c]);
      const double h2 = 1.0 / std::sqrt(2.0 * terms.q2[c]);
      radius[c] = kPruneRadiusBandwidths * std::max(h1, h2);
    }
    index = PruningIndex(data_.candidates.lon, data_.candidates.lat, radius);
  }

  std::vector<double> log_lik(n);
  parallel_for(n, [&](std::size_t l) {
    thread_local std::vector<double> lw;
    thread_local std::vector<std::uint32_t> ids;
    const double ec = event_cos_[l];
    const double es = event_sin_[l];
    ids.clear();
    if (!index.empty()) {
      index.for_each_near(data_.lon[l], data_.lat[l],
                          [&](std::size_t c) { ids.push_back(static_cast<std::uint32_t>(c)); });
    }
    Rng rng = Rng::stream({options_.seed, static_cast<std::uint64_t>(options_.chain), sweep, 8, l});
    if (!ids.empty()) {
      lw.resize(ids.size());
      for (std::size_t k = 0; k < ids.size(); ++k) lw[k] = terms.log_weight(data_, l, ec, es, ids[k]);
      log_lik[l] = log_sum_exp(lw);
      if (std::isfinite(log_lik[l])) {
        state_.assignment[l] = ids[sample_log_categorical(lw, rng)];
        return;
      }
    }
    lw.resize(m);
    for (std::size_t c = 0; c < m; ++c) lw[c] = terms.log_weight(data_, l, ec, es, c);
    log_lik[l] = log_sum_exp(lw);
    if (std::isfinite(log_lik[l])) {
      state_.assignment[l] = static_cast<std::uint32_t>(sample_log_categorical(lw, rng));
    }
  });
  double total = 0.0;
  for (double v : log_lik) total += v;
  refresh_assigned();
  return total;
}

double GibbsSampler::sweep(std::uint64_t index) {
  auto& p = state_.params;
  {
    Rng rng = step_rng(index, 1);
    p.alpha1 = sample_alpha_spatial(1, rng);
  }
  {
    Rng rng = step_rng(index, 2);
    p.beta1 = sample_beta_grid(1, rng);
  }
  {
    Rng rng = step_rng(index, 3);
    p.alpha2 = sample_alpha_spatial(2, rng);
  }
  {
    Rng rng = step_rng(index, 4);
    p.beta2 = sample_beta_grid(2, rng);
  }
  if (data_.has_time) {
    {
      Rng rng = step_rng(index, 5);
      p.alpha3 = sample_alpha3_grid(rng);
    }
    Rng rng = step_rng(index, 6);
    p.beta3 = sample_beta_grid(3, rng);
  }
  if (data_.candidates.slots() > 1) {
    Rng rng = step_rng(index, 7);
    p.weights = sample_weights(rng);
  }
  return sample_assignments(index);
}

PosteriorSamples GibbsSampler::run() {
  if (options_.initial) {
    set_state(*options_.initial);
  } else {
    initialize();
  }
  PosteriorSamples out;
  out.chain = options_.chain;
  out.warmup = options_.schedule.warmup;
  const int total = options_.schedule.warmup + options_.schedule.samples;
  out.draws.reserve(static_cast<std::size_t>(options_.schedule.samples));
  for (int s = 0; s < total; ++s) {
    const double ll = sweep(static_cast<std::uint64_t>(s));
    if (!std::isfinite(ll)) {
      throw InferenceError("non-finite log-likelihood at sweep " + std::to_string(s) + " of chain " +
                           std::to_string(options_.chain) + " (alpha1=" +
                           std::to_string(state_.params.alpha1) + ", alpha2=" +
                           std::to_string(state_.params.alpha2) + ")");
    }
    if (s < options_.schedule.warmup) {
      if (options_.keep_warmup) out.warmup_draws.push_back(state_.params);
    } else {
      out.draws.push_back(state_.params);
      out.log_likelihood.push_back(ll);
    }
  }
  return out;
}

PosteriorSamples run_chain(const GibbsData& data, const GibbsOptions& options) {
  GibbsSampler sampler(data, options);
  return sampler.run();
}

ModelParams posterior_mean(std::span<const PosteriorSamples> chains) {
  std::size_t count = 0;
  ModelParams mean;
  bool first = true;
  for (const auto& ch : chains) {
    for (const auto& d : ch.draws) {
      if (first) {
        mean = d;
        mean.alpha1 = mean.alpha2 = mean.alpha3 = 0.0;
        mean.beta1 = mean.beta2 = mean.beta3 = 0.0;
        std::fill(mean.weights.begin(), mean.weights.end(), 0.0);
        first = false;
      }
      if (d.weights.size() != mean.weights.size()) {
        throw ArgumentError("posterior_mean: draws disagree on the number of weights");
      }
      mean.alpha1 += d.alpha1;
      mean.alpha2 += d.alpha2;
      mean.alpha3 += d.alpha3;
      mean.beta1 += d.beta1;
      mean.beta2 += d.beta2;
      mean.beta3 += d.beta3;
      for (std::size_t k = 0; k < d.weights.size(); ++k) mean.weights[k] += d.weights[k];
      ++count;
    }
  }
  if (count == 0) throw ArgumentError("posterior_mean: no draws");
  const double inv = 1.0 / static_cast<double>(count);
  mean.alpha1 *= inv;
  mean.alpha2 *= inv;
  mean.alpha3 *= inv;
  mean.beta1 *= inv;
  mean.beta2 *= inv;
  mean.beta3 *= inv;
  double wsum = 0.0;
  for (double w : mean.weights) wsum += w;
  for (double& w : mean.weights) w /= wsum;
  return mean;
}

ModelParams posterior_mean(const PosteriorSamples& samples) {
  return posterior_mean(std::span<const PosteriorSamples>(&samples, 1));
}

double mixture_log_likelihood(const GibbsData& data, const ModelParams& params) {
  const CandidateTerms terms(data, params);
  std::vector<double> lw(data.candidates.size());
  double total = 0.0;
  for (std::size_t l = 0; l < data.n(); ++l) {
    const double ec = event_cos(data, l);
    const double es = event_sin(data, l);
    for (std::size_t c = 0; c < lw.size(); ++c) lw[c] = terms.log_weight(data, l, ec, es, c);
    total += log_sum_exp(lw);
  }
  return total;
}

double augmented_log_likelihood(const GibbsData& data, const ModelParams& params,
                                std::span<const std::uint32_t> assignment) {
  if (assignment.size() != data.n()) throw ArgumentError("one assignment per event required");
  const CandidateTerms terms(data, params);
  double total = 0.0;
  for (std::size_t l = 0; l < data.n(); ++l) {
    total += terms.log_weight(data, l, event_cos(data, l), event_sin(data, l), assignment[l]);
  }
  return total;
}

std::vector<std::string> param_names(const ModelParams& params) {
  std::vector<std::string> names{"alpha1", "beta1", "alpha2", "beta2"};
  if (params.has_time) {
    names.emplace_back("alpha3");
    names.emplace_back("beta3");
  }
  for (std::size_t k = 0; k < params.weights.size(); ++k) names.push_back("w" + std::to_string(k + 1));
  return names;
}

std::vector<double> param_values(const ModelParams& params) {
  std::vector<double> v{params.alpha1, params.beta1, params.alpha2, params.beta2};
  if (params.has_time) {
    v.push_back(params.alpha3);
    v.push_back(params.beta3);
  }
  v.insert(v.end(), params.weights.begin(), params.weights.end());
  return v;
}

std::vector<ParamSummary> summarize(std::span<const PosteriorSamples> chains) {
  std::vector<std::vector<double>> columns;
  std::vector<std::string> names;
  for (const auto& ch : chains) {
    for (const auto& d : ch.draws) {
      const auto v = param_values(d);
      if (columns.empty()) {
        names = param_names(d);
        columns.resize(v.size());
      }
      for (std::size_t k = 0; k < v.size() && k < columns.size(); ++k) columns[k].push_back(v[k]);
    }
  }
  if (columns.empty()) throw ArgumentError("summarize: no draws");
  auto quantile = [](std::vector<double> x, double p) {
    std::sort(x.begin(), x.end());
    const double pos = p * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
  };
  std::vector<ParamSummary> out;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    ParamSummary s;
    s.name = names[k];
    for (double v : columns[k]) s.mean += v;
    s.mean /= static_cast<double>(columns[k].size());
    s.lower = quantile(columns[k], 0.025);
    s.upper = quantile(columns[k], 0.975);
    out.push_back(s);
  }
  return out;
}

double alpha_to_meters(double alpha, double km_per_degree) { return 1000.0 * km_per_degree / alpha; }

double alpha3_to_minutes(double alpha3) { return 60.0 / alpha3; }

void write_trace_csv(std::ostream& out, std::span<const PosteriorSamples> chains) {
  out << "chain,sweep,param,value\n";
  out.precision(17);
  for (const auto& ch : chains) {
    std::size_t sweep = 0;
    auto emit = [&](const ModelParams& p) {
      const auto names = param_names(p);
      const auto values = param_values(p);
      for (std::size_t k = 0; k < names.size(); ++k) {
        out << ch.chain << ',' << sweep << ',' << names[k] << ',' << values[k] << '\n';
      }
      ++sweep;
    };
    if (ch.warmup_draws.empty()) sweep = static_cast<std::size_t>(ch.warmup);
    for (const auto& p : ch.warmup_draws) emit(p);
    for (const auto& p : ch.draws) emit(p);
  }
}

MixtureDensity FittedModel::pilot() const { return preliminary_fixed_kde(pilot_points, preliminary.mean); }

std::optional<double> FittedModel::weight_for_lag(int lag) const {
  for (std::size_t s = 0; s < fit_points.slots(); ++s) {
    if (fit_points.slot_lag[s] == lag) return adaptive.mean.weights[s];
  }
  return std::nullopt;
}

namespace {

StageFit run_stage(const GibbsData& data, const FitConfig& config, const ChainSchedule& schedule,
                   std::uint64_t stage) {
  StageFit out;
  for (int c = 0; c < std::max(1, config.chains); ++c) {
    GibbsOptions opt;
    opt.schedule = schedule;
    opt.seed = Rng::stream({config.seed, stage})();
    opt.chain = c;
    opt.grids = config.grids;
    opt.prune_assignments = config.prune_assignments;
    out.chains.push_back(run_chain(data, opt));
  }
  out.mean = posterior_mean(out.chains);
  return out;
}

}  // namespace

FittedModel fit(const BlockedDataset& blocked, const FitConfig& config) {
  if (blocked.training.events.empty()) throw FitError("fit: the training block has no events");
  FittedModel model;
  model.config = config;
  model.pilot_points = MixturePoints::from_blocks(blocked, false);
  if (model.pilot_points.size() == 0) throw FitError("fit: every historical block is empty");
  model.training_count = blocked.training.events.size();

  const GibbsData prelim = GibbsData::make(model.pilot_points, blocked.training.events, nullptr,
                                           config.has_time);
  model.preliminary =
      run_stage(prelim, config, config.preliminary_schedule.value_or(config.schedule), 1);

  const MixtureDensity pilot = model.pilot();
  model.fit_points = MixturePoints::from_blocks(blocked, true);
  model.scales = compute_local_scales(model.fit_points, pilot);
  const GibbsData adaptive =
      GibbsData::make(model.fit_points, blocked.training.events, &model.scales, config.has_time);
  model.adaptive = run_stage(adaptive, config, config.schedule, 2);

  std::vector<EventRecord> all;
  for (const auto& b : blocked.historical) all.insert(all.end(), b.events.begin(), b.events.end());
  if (blocked.expert) all.insert(all.end(), blocked.expert->events.begin(), blocked.expert->events.end());
  all.insert(all.end(), blocked.training.events.begin(), blocked.training.events.end());
  model.data_digest = events_digest(all);
  return model;
}

}  // namespace hotspot
