#pragma once
// Core domain types shared by the analytic engine and the simulator:
// source parameters, scheduling policies, packet tags, and the canonical
// state encodings used for both the observer chain and the fluid-queue
// phase process.

#include <algorithm>
#include <compare>
#include <stdexcept>
#include <string>
#include <vector>

namespace aoi {

// Queueing/scheduling disciplines of the single-server update system.
//   FSFS - per-source buffers, sources served in first-arrival order,
//          replacement keeps the service slot.
//   ESFS - per-source buffers, serve the queued source whose last service
//          started longest ago.
//   SBR  - one shared buffer slot, any arrival replaces its content.
enum class Policy { FSFS, ESFS, SBR };

const char* to_string(Policy p);
Policy policy_from_string(const std::string& s);  // throws std::invalid_argument

// Packet tag codes. Ordinary sources use their 1-based index. Three special
// tags distinguish the tagged source's packets over one regeneration cycle;
// they sort after every ordinary index.
namespace tag {
constexpr int kMaxSources = 99;
constexpr int k1p = 101;  // tagged-source packet already in service when the cycle starts
constexpr int k1c = 102;  // tagged-source packet whose arrival starts the cycle
constexpr int k1n = 103;  // tagged-source packet whose delivery ends the cycle

inline bool is_special(int code) { return code >= k1p; }
inline int source_of(int code) { return is_special(code) ? 1 : code; }
std::string to_string(int code);  // "3", "1p", "1c", "1n"
}  // namespace tag

// Per-source Poisson arrival rates and exponential service rates.
struct SourceParams {
  std::vector<double> lambdas;
  std::vector<double> mus;

  SourceParams(std::vector<double> lambdas_in, std::vector<double> mus_in);

  int count() const { return static_cast<int>(lambdas.size()); }
  double lambda(int n) const { return lambdas.at(n - 1); }  // 1-based
  double mu(int n) const { return mus.at(n - 1); }
  double load(int n) const { return lambda(n) / mu(n); }    // rho_n
  double total_load() const;                                // rho
  double total_arrival_rate() const;

  // Relabel sources a <-> b (1-based). Used to analyze a tagged source by
  // letting it play the role of source 1.
  SourceParams with_swapped(int a, int b) const;

  bool operator==(const SourceParams&) const = default;
};

// Uniform payload for one system state. Field use per policy:
//   FSFS/SBR: `server` holds the tag in service (0 = idle) and `queue` the
//             waiting tags in service order (front is served next; SBR holds
//             at most one element). `order` stays empty.
//   ESFS:     `order` is the full service-status permutation (front = served
//             longest ago, back = most recently started); `queue` is the set
//             of waiting tags kept sorted; `server` is 0 when idle and
//             order.back() when busy.
// The fluid-reset sentinel state uses server = kSentinelServer.
//
// Canonical ordering is lexicographic on the serialized code tuple
// (server, order, queue) -- equivalently on the zero-padded textual form --
// so every enumerated space has one reproducible layout.
constexpr int kSentinelServer = -1;

struct StateTuple {
  int server = 0;
  std::vector<int> order;
  std::vector<int> queue;

  auto operator<=>(const StateTuple&) const = default;
};

using ObserverState = StateTuple;

// One state of the phase process: phase 1-3 carry a StateTuple payload,
// phase 4 is the singleton fluid-reset sentinel. Ordering puts phase first,
// so the sentinel always lands at the final index of a sorted space.
struct PhaseState {
  int phase = 0;
  StateTuple t;

  auto operator<=>(const PhaseState&) const = default;
};

PhaseState sentinel_state();

std::string to_string(const ObserverState& s, Policy p);
std::string to_string(const PhaseState& s, Policy p);

// Index of `state` in a canonically ordered space (sorted ascending).
// Throws std::out_of_range when the state is not a member.
template <typename State>
std::size_t canonical_index(const State& state, const std::vector<State>& space) {
  auto it = std::lower_bound(space.begin(), space.end(), state);
  if (it == space.end() || *it != state) {
    throw std::out_of_range("canonical_index: state not in space");
  }
  return static_cast<std::size_t>(it - space.begin());
}

}  // namespace aoi
