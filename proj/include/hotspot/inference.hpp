#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hotspot/data_model.hpp"
#include "hotspot/density.hpp"
#include "hotspot/rng.hpp"

namespace hotspot {

struct ChainSchedule {
  int warmup = 100;
  int samples = 100;
};

// Discrete supports of the grid steps.
struct PriorGrids {
  std::vector<double> beta;    // {0, 0.01, ..., 0.99}
  std::vector<double> alpha3;  // {0, 0.01, ..., 10}

  static PriorGrids standard();
  static std::vector<double> arithmetic(double first, double step, std::size_t count);
};

// Everything the sampler conditions on: the candidate support S_IJ (history,
// plus expert when present) with log A per candidate, and the training events.
struct GibbsData {
  MixturePoints candidates;
  std::vector<double> log_A;
  std::vector<double> lon;
  std::vector<double> lat;
  std::vector<double> hours;
  bool has_time = true;

  std::size_t n() const { return lon.size(); }

  // scales == nullptr means A = 1 for every candidate.
  static GibbsData make(MixturePoints candidates, std::span<const EventRecord> training,
                        const LocalScales* scales, bool has_time);
};

struct GibbsState {
  ModelParams params;
  std::vector<std::uint32_t> assignment;  // candidate index per training event
};

struct GibbsOptions {
  ChainSchedule schedule;
  std::uint64_t seed = 1;
  int chain = 0;
  PriorGrids grids = PriorGrids::standard();
  // Step 8 considers only candidates within 6 bandwidths of the event.
  bool prune_assignments = false;
  std::optional<GibbsState> initial;  // replaces Step 0
  bool keep_warmup = true;
};

struct PosteriorSamples {
  int chain = 0;
  int warmup = 0;
  std::vector<ModelParams> draws;
  std::vector<double> log_likelihood;  // log of the mixture likelihood at each draw
  std::vector<ModelParams> warmup_draws;
};

// Draws from the full conditionals of the augmented posterior. The spatial
// scale steps draw alpha^2 from Gamma(n/2 + 1, rate) with
// rate = sum_l d_l^2 A^(2 beta) / 2, so the prior is flat in alpha^2.
class GibbsSampler {
 public:
  GibbsSampler(const GibbsData& data, GibbsOptions options);

  const GibbsState& state() const { return state_; }
  void set_state(GibbsState state);
  // Step 0: SROT-based scales, betas at the grid atom nearest 0.5, uniform
  // weights, assignments drawn from the prior.
  void initialize();

  double alpha_shape() const;
  double alpha_rate(int dim, double beta) const;
  std::vector<double> beta_log_conditional(int dim, std::span<const double> grid) const;
  std::vector<double> alpha3_log_conditional(std::span<const double> grid) const;
  // log of the Step 8 factor for every candidate; sums (after exp) to f(s_l).
  std::vector<double> assignment_log_weights(std::size_t l) const;

  double sample_alpha_spatial(int dim, Rng& rng) const;
  double sample_beta_grid(int dim, Rng& rng) const;
  double sample_alpha3_grid(Rng& rng) const;
  std::vector<double> sample_weights(Rng& rng) const;
  // Redraws every assignment; returns the log mixture likelihood of the
  // current parameters.
  double sample_assignments(std::uint64_t sweep);

  // Steps 1-8 once; returns the log-likelihood of the resulting parameters.
  double sweep(std::uint64_t index);
  PosteriorSamples run();

  // Counts f_s of training events assigned to each slot.
  std::vector<std::size_t> slot_counts() const;

 private:
  void refresh_assigned();
  Rng step_rng(std::uint64_t sweep, std::uint64_t step) const;

  const GibbsData& data_;
  GibbsOptions options_;
  GibbsState state_;
  // Per training event, for its current assignment.
  std::vector<double> d1_sq_;
  std::vector<double> d2_sq_;
  std::vector<double> log_a_;
  std::vector<double> cos_dt_;
  std::vector<double> event_cos_;
  std::vector<double> event_sin_;
  std::vector<double> cand_cos_;
  std::vector<double> cand_sin_;
};

PosteriorSamples run_chain(const GibbsData& data, const GibbsOptions& options);

// Element-wise mean over all draws of all chains; weights renormalised.
ModelParams posterior_mean(std::span<const PosteriorSamples> chains);
ModelParams posterior_mean(const PosteriorSamples& samples);

// log prod_l f(s_l) for the (non-augmented) mixture.
double mixture_log_likelihood(const GibbsData& data, const ModelParams& params);
// log of the augmented likelihood for a fixed assignment.
double augmented_log_likelihood(const GibbsData& data, const ModelParams& params,
                                std::span<const std::uint32_t> assignment);

// Draws index k with probability proportional to exp(log_w[k]).
std::size_t sample_log_categorical(std::span<const double> log_w, Rng& rng);

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double lower = 0.0;  // 2.5% quantile
  double upper = 0.0;  // 97.5% quantile
};

std::vector<std::string> param_names(const ModelParams& params);
std::vector<double> param_values(const ModelParams& params);
std::vector<ParamSummary> summarize(std::span<const PosteriorSamples> chains);

// Metres covered by one bandwidth 1/alpha (alpha in inverse degrees).
double alpha_to_meters(double alpha, double km_per_degree);
// Minutes covered by 1/alpha3 (alpha3 in inverse hours).
double alpha3_to_minutes(double alpha3);

// CSV: chain,sweep,param,value. Sweeps count from 0 including warm-up when kept.
void write_trace_csv(std::ostream& out, std::span<const PosteriorSamples> chains);

struct FitConfig {
  ChainSchedule schedule;
  std::optional<ChainSchedule> preliminary_schedule;  // defaults to schedule
  int chains = 1;
  std::uint64_t seed = 1;
  bool has_time = true;
  bool prune_assignments = false;
  PriorGrids grids = PriorGrids::standard();
};

struct StageFit {
  std::vector<PosteriorSamples> chains;
  ModelParams mean;
};

// Result of the two-stage fit. The pilot is the fixed-bandwidth KDE over the
// history at the preliminary posterior mean; adaptive scales for the fit and
// for later forecasts are taken against it.
struct FittedModel {
  FitConfig config;
  MixturePoints pilot_points;  // non-empty history blocks
  StageFit preliminary;
  MixturePoints fit_points;  // history plus expert
  LocalScales scales;        // one per fit point
  StageFit adaptive;
  std::size_t training_count = 0;
  std::string data_digest;

  const ModelParams& mean() const { return adaptive.mean; }
  bool has_time() const { return config.has_time; }
  bool has_expert() const { return fit_points.has_expert; }
  MixtureDensity pilot() const;
  // Weight of the slot with the given lag (0 = expert), if fitted.
  std::optional<double> weight_for_lag(int lag) const;
};

// The training block must be non-empty and at least one historical block
// must hold events; otherwise FitError.
FittedModel fit(const BlockedDataset& blocked, const FitConfig& config);

}  // namespace hotspot
