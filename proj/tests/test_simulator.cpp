#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "aoi/observer.hpp"
#include "aoi/simulator.hpp"

using namespace aoi;

namespace {
SimConfig quick_config(Policy policy, SourceParams params, std::uint64_t events,
                       std::uint64_t seed = 42) {
  SimConfig cfg{std::move(params)};
  cfg.policy = policy;
  cfg.horizon_events = events;
  cfg.seed = seed;
  cfg.cdf_grid = {0.5, 1.0, 2.0, 4.0, 8.0};
  cfg.check_invariants = true;
  return cfg;
}
}  // namespace

TEST_CASE("invalid configurations are rejected") {
  SimConfig cfg{SourceParams({1.0}, {1.0})};
  CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);  // no horizon at all
  cfg.horizon_events = 1000;
  cfg.warmup = 0.5;
  CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
  cfg.warmup = 0.1;
  cfg.cdf_grid = {1.0, 1.0};
  CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
  cfg.cdf_grid = {-1.0};
  CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
  cfg.cdf_grid.clear();
  std::vector<double> many(13, 1.0), mus(13, 1.0);
  SimConfig big{SourceParams(many, mus)};
  big.horizon_events = 1000;
  CHECK_THROWS_AS(simulate(big), std::invalid_argument);  // tracking cap
  big.track_observer = false;
  CHECK_NOTHROW(simulate(big));
}

TEST_CASE("identical config and seed reproduce identical results") {
  for (Policy policy : {Policy::FSFS, Policy::ESFS, Policy::SBR}) {
    const auto cfg = quick_config(policy, SourceParams({1.0, 2.0}, {3.0, 1.0}), 200'000);
    const auto a = simulate(cfg);
    const auto b = simulate(cfg);
    CHECK(a.per_source_mean_aoi == b.per_source_mean_aoi);
    CHECK(a.per_source_cdf == b.per_source_cdf);
    CHECK(a.observer_occupancy == b.observer_occupancy);
    CHECK(a.arrival_seen == b.arrival_seen);
    CHECK(a.event_count == b.event_count);

    auto other = cfg;
    other.seed = 43;
    const auto c = simulate(other);
    CHECK(a.per_source_mean_aoi != c.per_source_mean_aoi);
  }
}

TEST_CASE("time-horizon runs measure the trailing window") {
  SimConfig cfg{SourceParams({1.0, 0.5}, {2.0, 2.0})};
  cfg.policy = Policy::SBR;
  cfg.horizon_time = 5000.0;
  cfg.warmup = 0.2;
  cfg.cdf_grid = {0.5, 1.0, 2.0};
  const auto r = simulate(cfg);
  CHECK(r.measured_time == doctest::Approx(4000.0));
  CHECK(r.event_count > 0);
}

TEST_CASE("cdf rows are monotone time fractions and occupancy is a distribution") {
  for (Policy policy : {Policy::FSFS, Policy::ESFS, Policy::SBR}) {
    auto cfg = quick_config(policy, SourceParams({1.0, 2.0, 0.7}, {3.0, 1.0, 2.0}), 300'000);
    const auto r = simulate(cfg);
    for (const auto& row : r.per_source_cdf) {
      double prev = 0.0;
      for (double v : row) {
        CHECK(v >= prev);
        CHECK(v <= 1.0 + 1e-12);
        prev = v;
      }
    }
    double occ = 0.0;
    for (double v : r.observer_occupancy) {
      CHECK(v >= 0.0);
      occ += v;
    }
    CHECK(occ == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("every visited state belongs to the enumerated observer space") {
  for (Policy policy : {Policy::FSFS, Policy::ESFS, Policy::SBR}) {
    const SourceParams p({1.0, 2.0, 0.7}, {3.0, 1.0, 2.0});
    const auto r = simulate(quick_config(policy, p, 200'000));
    std::set<std::string> valid;
    for (const auto& s : enumerate_observer_states(policy, p.count())) {
      valid.insert(to_string(s, policy));
    }
    CHECK(!r.observer_states.empty());
    for (const auto& s : r.observer_states) {
      INFO("state ", s);
      CHECK(valid.count(s) == 1);
    }
  }
}

TEST_CASE("arrival tallies see time averages (internal PASTA check)") {
  const auto cfg = quick_config(Policy::FSFS, SourceParams({1.0, 2.0}, {3.0, 1.0}), 10'000'000);
  const auto r = simulate(cfg);
  const auto seen = r.pooled_arrival_seen();
  double tv = 0.0;
  for (std::size_t i = 0; i < seen.size(); ++i) {
    tv += std::abs(seen[i] - r.observer_occupancy[i]);
  }
  CHECK(0.5 * tv < 5e-3);
}

TEST_CASE("replication: deterministic seeds, single run reduces to itself") {
  SimConfig cfg{SourceParams({0.9, 0.3}, {1.5, 1.0})};
  cfg.policy = Policy::ESFS;
  cfg.horizon_events = 100'000;
  cfg.seed = 7;
  cfg.track_observer = false;

  const auto one = replicate(cfg, 1);
  CHECK(one.runs.size() == 1);
  CHECK(one.mean_per_source_aoi == one.runs[0].per_source_mean_aoi);
  CHECK(one.stderr_per_source_aoi == std::vector<double>{0.0, 0.0});

  const auto again = replicate(cfg, 3);
  const auto again2 = replicate(cfg, 3);
  for (int r = 0; r < 3; ++r) {
    CHECK(again.runs[r].per_source_mean_aoi == again2.runs[r].per_source_mean_aoi);
  }
  CHECK(again.runs[0].per_source_mean_aoi != again.runs[1].per_source_mean_aoi);
  CHECK_THROWS_AS(replicate(cfg, 0), std::invalid_argument);
}

TEST_CASE("ten replications of the unbalanced two-source scenario are tight") {
  SimConfig cfg{SourceParams({1.2, 0.4}, {1.0, 1.0})};
  cfg.policy = Policy::FSFS;
  cfg.horizon_time = 1'000'000.0;
  cfg.seed = 2024;
  cfg.track_observer = false;
  const auto rep = replicate(cfg, 10);
  for (int s = 0; s < 2; ++s) {
    CHECK(rep.stderr_per_source_aoi[s] < 0.01 * rep.mean_per_source_aoi[s]);
  }
  CHECK(rep.stderr_overall_aoi < 0.01 * rep.mean_overall_aoi);
}
