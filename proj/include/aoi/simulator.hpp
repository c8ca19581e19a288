#pragma once
// Discrete-event simulation of the N-source update system: exponential
// interarrivals and service, per-policy buffer semantics, exact piecewise-
// linear age accounting (time-average CDF values are exact sojourn fractions,
// not histograms), plus observer-state occupancy and arrival-seen tallies.

#include <cstdint>
#include <string>
#include <vector>

#include "aoi/types.hpp"

namespace aoi {

struct SimConfig {
  SourceParams params;
  Policy policy = Policy::FSFS;
  double horizon_time = 0.0;        // seconds; used when horizon_events == 0
  std::uint64_t horizon_events = 0; // event budget; takes precedence when > 0
  std::uint64_t seed = 1;
  std::vector<double> cdf_grid;     // strictly increasing, nonnegative ages
  double warmup = 0.1;              // leading fraction discarded, in [0, 0.5)
  bool track_observer = true;       // supported for up to 12 sources
  bool check_invariants = false;    // per-event structural checks (tests)
};

struct SimResult {
  std::vector<double> per_source_mean_aoi;
  std::vector<std::vector<double>> per_source_cdf;  // [source][grid index]
  std::vector<std::uint64_t> per_source_deliveries;

  std::vector<std::string> observer_states;            // canonical serialized form
  std::vector<double> observer_occupancy;              // time fractions, aligned
  std::vector<std::vector<std::uint64_t>> arrival_seen;  // [source][state index]

  std::uint64_t event_count = 0;  // events inside the measured window
  double measured_time = 0.0;
  std::vector<double> cdf_grid;

  double violation(std::size_t source, std::size_t grid_index) const {
    return 1.0 - per_source_cdf.at(source).at(grid_index);
  }
  // Arrival-seen distribution pooled over sources.
  std::vector<double> pooled_arrival_seen() const;
};

SimResult simulate(const SimConfig& config);

struct ReplicateSummary {
  std::vector<SimResult> runs;
  std::vector<double> mean_per_source_aoi;
  std::vector<double> stderr_per_source_aoi;
  double mean_overall_aoi = 0.0;
  double stderr_overall_aoi = 0.0;
};

// Independent replications with seeds derived deterministically from the
// base seed; summary carries sample means and standard errors.
ReplicateSummary replicate(const SimConfig& config, int runs);

}  // namespace aoi
