#pragma once

// Shared inputs for the sampler tests and the acceptance run.

#include <cstdint>
#include <vector>

#include "hotspot/inference.hpp"
#include "oracles.hpp"

namespace fixtures {

// 3 history blocks of clustered points and a training block drawn near them,
// with random local scales.
hotspot::GibbsData small_data(std::uint64_t seed, std::size_t per_block = 15, std::size_t n_train = 25);

// Fixed parameters and a random assignment.
hotspot::GibbsState some_state(const hotspot::GibbsData& d, std::uint64_t seed);

// Per training event, for a given assignment.
struct Assigned {
  std::vector<double> d1, d2, la, dt;
};
Assigned assigned(const hotspot::GibbsData& d, const hotspot::GibbsState& st);

// Joint counts of (beta1 atom, slot of event 0's assignment) over the kept sweeps.
std::vector<std::size_t> micro_gibbs_counts(const oracle::MicroInstance& inst, int sweeps, int burn,
                                            std::uint64_t seed);

}  // namespace fixtures
