#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>

#include "aoi/distribution.hpp"
#include "aoi/observer.hpp"
#include "aoi/simulator.hpp"

using namespace aoi;

namespace {

// Enough events that the measured window holds at least 1e7 of them.
constexpr std::uint64_t kBudget = 11'200'000;

SimConfig sim_config(Policy policy, const SourceParams& params, std::vector<double> grid,
                     std::uint64_t seed) {
  SimConfig cfg{params};
  cfg.policy = policy;
  cfg.horizon_events = kBudget;
  cfg.seed = seed;
  cfg.warmup = 0.1;
  cfg.cdf_grid = std::move(grid);
  return cfg;
}

std::vector<double> shared_grid(const std::vector<AoiDistribution>& dists, int points) {
  double hi = 0.0;
  for (const auto& d : dists) hi = std::max(hi, d.quantile(0.9999));
  std::vector<double> xs(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) xs[static_cast<std::size_t>(i)] = hi * i / (points - 1);
  return xs;
}

}  // namespace

TEST_CASE("one-source mean age matches the simulator within half a percent") {
  const SourceParams p({1.0}, {1.0});
  const auto d = AoiDistribution(build_tagged_model(Policy::SBR, p, 1));
  auto cfg = sim_config(Policy::SBR, p, {}, 99);
  cfg.track_observer = false;
  const auto r = simulate(cfg);
  CHECK(r.event_count >= 10'000'000);
  CHECK(std::abs(r.per_source_mean_aoi[0] - d.mean()) / d.mean() < 0.005);
}

TEST_CASE("analytic and simulated distributions agree for random two- and three-source systems") {
  std::mt19937 rng(301);
  std::uniform_real_distribution<double> lam(0.3, 1.5), mu(0.8, 2.5);
  std::uint64_t seed = 1000;
  for (Policy policy : {Policy::FSFS, Policy::ESFS, Policy::SBR}) {
    for (int n : {2, 3}) {
      std::vector<double> l, m;
      for (int i = 0; i < n; ++i) {
        l.push_back(lam(rng));
        m.push_back(mu(rng));
      }
      const SourceParams params(l, m);
      const auto dists = build_all_distributions(policy, params);
      const auto xs = shared_grid(dists, 200);
      auto cfg = sim_config(policy, params, xs, ++seed);
      cfg.track_observer = false;
      const auto sim = simulate(cfg);
      REQUIRE(sim.event_count >= 10'000'000);
      for (int s = 0; s < n; ++s) {
        const auto analytic = dists[static_cast<std::size_t>(s)].cdf_grid(xs);
        double sup = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          sup = std::max(sup,
                         std::abs(analytic[i] - sim.per_source_cdf[static_cast<std::size_t>(s)][i]));
        }
        INFO(to_string(policy), " n=", n, " source ", s + 1, " sup=", sup);
        CHECK(sup < 0.01);
      }
    }
  }
}

TEST_CASE("stationary vector matches long-run occupancy fractions") {
  const SourceParams p({1.0, 2.0}, {3.0, 1.0});
  const auto chain = build_observer(Policy::FSFS, p);
  const auto sim = simulate(sim_config(Policy::FSFS, p, {}, 7));

  std::map<std::string, double> occupancy;
  for (std::size_t i = 0; i < sim.observer_states.size(); ++i) {
    occupancy[sim.observer_states[i]] = sim.observer_occupancy[i];
  }
  for (std::size_t i = 0; i < chain.states.size(); ++i) {
    const auto it = occupancy.find(to_string(chain.states[i], Policy::FSFS));
    const double seen = it == occupancy.end() ? 0.0 : it->second;
    CHECK(std::abs(seen - chain.stationary(static_cast<Eigen::Index>(i))) < 1e-3);
  }
}
