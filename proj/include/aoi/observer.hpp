#pragma once
// Observer chain Y(t): the finite CTMC describing what an arriving packet of
// the tagged source finds in the system. Its stationary vector doubles as the
// arrival-seen distribution (PASTA) and feeds the fluid model's cycle-restart
// weights.

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "aoi/types.hpp"

namespace aoi {

// One off-diagonal rate entry of the chain (from != to, rate > 0).
struct RateEntry {
  int from;
  int to;
  double rate;
};

struct ObserverChain {
  Policy policy;
  SourceParams params;
  std::vector<ObserverState> states;  // canonically ordered
  std::vector<RateEntry> rates;       // sparse off-diagonal entries
  Eigen::VectorXd stationary;         // size 0 until solved

  // Dense generator: off-diagonals from `rates`, diagonal = -(row sum).
  Eigen::MatrixXd generator() const;
  std::size_t index_of(const ObserverState& s) const { return canonical_index(s, states); }

  // Line-oriented debug dump, one "from | to | rate" line per entry.
  void dump(std::ostream& os) const;
};

// Every reachable observer state, exactly once, canonically ordered.
std::vector<ObserverState> enumerate_observer_states(Policy policy, int n);

// Chain with rates populated from the policy's transition table; the
// stationary vector is left empty.
ObserverChain build_observer_generator(Policy policy, const SourceParams& params);

// Stationary vector of the chain (direct dense solve with a normalization
// row; residual-checked). Throws std::runtime_error on a failed solve.
Eigen::VectorXd stationary_distribution(const ObserverChain& chain);

// Convenience: build the generator and solve the stationary vector.
ObserverChain build_observer(Policy policy, const SourceParams& params);

}  // namespace aoi
