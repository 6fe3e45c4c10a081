#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fixtures {

using namespace hotspot;

GibbsData small_data(std::uint64_t seed, std::size_t per_block, std::size_t n_train) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MixturePoints pts;
  const double cx[] = {77.20, 77.215, 77.19};
  const double cy[] = {28.60, 28.61, 28.595};
  for (int s = 0; s < 3; ++s) {
    std::vector<EventRecord> ev(per_block);
    for (auto& e : ev) {
      const int c = static_cast<int>(u(gen) * 3);
      e.lon = cx[c] + 0.003 * z(gen);
      e.lat = cy[c] + 0.003 * z(gen);
      e.time_of_day = std::fmod(20.0 + 2.0 * z(gen) + 48.0, 24.0);
    }
    pts.add_slot(ev, 3 - s);
  }
  std::vector<EventRecord> train(n_train);
  for (auto& e : train) {
    const int c = static_cast<int>(u(gen) * 3);
    e.lon = cx[c] + 0.003 * z(gen);
    e.lat = cy[c] + 0.003 * z(gen);
    e.time_of_day = std::fmod(20.0 + 2.0 * z(gen) + 48.0, 24.0);
  }
  LocalScales scales;
  for (std::size_t k = 0; k < pts.size(); ++k) scales.A.push_back(0.5 + 1.5 * u(gen));
  return GibbsData::make(pts, train, &scales, true);
}

GibbsState some_state(const GibbsData& d, std::uint64_t seed) {
  GibbsState st;
  st.params.alpha1 = 300.0;
  st.params.alpha2 = 250.0;
  st.params.beta1 = 0.3;
  st.params.beta2 = 0.6;
  st.params.alpha3 = 1.1;
  st.params.beta3 = 0.2;
  st.params.weights = {0.2, 0.3, 0.5};
  std::mt19937_64 gen(seed);
  for (std::size_t l = 0; l < d.n(); ++l) {
    st.assignment.push_back(static_cast<std::uint32_t>(gen() % d.candidates.size()));
  }
  return st;
}

Assigned assigned(const GibbsData& d, const GibbsState& st) {
  Assigned a;
  for (std::size_t l = 0; l < d.n(); ++l) {
    const auto c = st.assignment[l];
    a.d1.push_back(std::pow(d.lon[l] - d.candidates.lon[c], 2));
    a.d2.push_back(std::pow(d.lat[l] - d.candidates.lat[c], 2));
    a.la.push_back(d.log_A[c]);
    a.dt.push_back(d.hours[l] - d.candidates.hours[c]);
  }
  return a;
}

std::vector<std::size_t> micro_gibbs_counts(const oracle::MicroInstance& inst, int sweeps, int burn,
                                            std::uint64_t seed) {
  GibbsOptions opt;
  opt.grids = inst.grids;
  opt.seed = seed;
  GibbsSampler s(inst.data, opt);
  GibbsState st;
  st.params.alpha1 = 500.0;
  st.params.alpha2 = 500.0;
  st.params.beta1 = 0.4;
  st.params.beta2 = 0.4;
  st.params.alpha3 = 1.0;
  st.params.beta3 = 0.4;
  st.params.weights = {0.5, 0.5};
  st.assignment = {0, 3};
  s.set_state(st);
  const std::size_t slots = inst.data.candidates.slots();
  const auto& grid = inst.grids.beta;
  std::vector<std::size_t> counts(grid.size() * slots, 0);
  for (int k = 0; k < sweeps; ++k) {
    s.sweep(static_cast<std::uint64_t>(k));
    if (k < burn) continue;
    const auto& now = s.state();
    const auto b = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), now.params.beta1) - grid.begin());
    ++counts[b * slots + static_cast<std::size_t>(inst.data.candidates.slot[now.assignment[0]])];
  }
  return counts;
}

}  // namespace fixtures
