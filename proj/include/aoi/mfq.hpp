#pragma once
// Fluid-queue model of one tagged source's age process. A regeneration cycle
// walks through phases 1-3 (fluid rises at unit rate) and resets through the
// single phase-4 state (unit down-drift). The positive-drift block W, the
// reset-entry rates h = -W*1, the cycle-restart weights alpha (from the
// observer chain's stationary vector) and the phase-3 selector beta fully
// determine the age distribution in matrix-exponential form.

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aoi/observer.hpp"
#include "aoi/subgenerator.hpp"
#include "aoi/types.hpp"

namespace aoi {

struct PhaseSpaces {
  std::vector<PhaseState> q1, q2, q3, q4;  // each canonically ordered; q4 singleton

  int dim_positive() const {
    return static_cast<int>(q1.size() + q2.size() + q3.size());
  }
  // Concatenation q1|q2|q3|q4; equals the canonical order of the union, with
  // the sentinel at the final index.
  std::vector<PhaseState> all() const;
};

struct MfqModel {
  Policy policy;
  SourceParams params;      // original (un-renumbered) rates
  int tagged_source = 1;
  PhaseSpaces phases;
  std::vector<PhaseState> states;  // the L positive-drift states, canonical order

  Subgenerator W;           // L x L, off-diagonals >= 0, diagonal < 0
  Eigen::VectorXd h;        // rates into phase 4; h = -W*1
  Eigen::RowVectorXd alpha; // phase-4 exit weights, supported on Q1 and Q2, sums to 1
  Eigen::VectorXd beta;     // 0/1 selector of Q3

  std::size_t index_of(const PhaseState& s) const { return canonical_index(s, states); }
  void dump(std::ostream& os) const;  // states, W/h/alpha triplets (debug/golden aid)
};

struct MfqDiagnostics {
  std::vector<std::string> violations;  // empty when the model is well formed
  double max_row_residual = 0.0;        // max |(W*1 + h)_q|
  double alpha_mass = 0.0;              // sum of alpha
  double min_expected_reset_time = 0.0; // min of x solving W x = -1
  bool ok() const { return violations.empty(); }
};

// Phase state spaces for a system of n sources with the tagged source playing
// the role of source 1. `tagged` is validated (1 <= tagged <= n); the spaces
// themselves do not depend on which source is tagged.
PhaseSpaces enumerate_phase_states(Policy policy, int n, int tagged);

// Assemble the model for `tagged` from an observer chain built on
// params.with_swapped(1, tagged) (for tagged = 1: params itself). The
// chain's stationary vector must be solved.
MfqModel build_mfq(Policy policy, const SourceParams& params, int tagged,
                   const ObserverChain& observer);

// Convenience wrapper: renumber, build the observer, assemble.
MfqModel build_tagged_model(Policy policy, const SourceParams& params, int tagged);

// Check every structural invariant of an assembled model.
MfqDiagnostics validate_mfq(const MfqModel& model);

// Dense W threshold; larger models use sparse storage.
constexpr int kDenseLimit = 2000;

}  // namespace aoi
