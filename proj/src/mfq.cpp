#include "aoi/mfq.hpp"

#include <numeric>
#include <ostream>
#include <sstream>

#include <Eigen/SparseCore>

namespace aoi {

namespace {

void check_args(int n, int tagged) {
  if (n < 1) throw std::invalid_argument("source count must be >= 1");
  if (n > tag::kMaxSources) throw std::invalid_argument("source count exceeds supported maximum");
  if (tagged < 1 || tagged > n) throw std::invalid_argument("tagged source index out of range");
}

std::vector<int> ordinary_sources(int n) {  // {2, ..., n}
  std::vector<int> v;
  for (int i = 2; i <= n; ++i) v.push_back(i);
  return v;
}

// Ordered selections of pool, all lengths 0..limit.
void ordered_selections(const std::vector<int>& pool, int limit, std::vector<int>& cur,
                        std::vector<char>& used, std::vector<std::vector<int>>& out) {
  out.push_back(cur);
  if (static_cast<int>(cur.size()) == limit) return;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (used[i]) continue;
    used[i] = 1;
    cur.push_back(pool[i]);
    ordered_selections(pool, limit, cur, used, out);
    cur.pop_back();
    used[i] = 0;
  }
}

std::vector<std::vector<int>> all_ordered_selections(const std::vector<int>& pool, int limit) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::vector<char> used(pool.size(), 0);
  ordered_selections(pool, limit, cur, used, out);
  return out;
}

std::vector<std::vector<int>> all_permutations(std::vector<int> pool) {
  std::sort(pool.begin(), pool.end());
  std::vector<std::vector<int>> out;
  do {
    out.push_back(pool);
  } while (std::next_permutation(pool.begin(), pool.end()));
  return out;
}

std::vector<std::vector<int>> all_subsets_sorted(const std::vector<int>& pool) {
  std::vector<std::vector<int>> out;
  const std::size_t n = pool.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::vector<int> s;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) s.push_back(pool[i]);
    }
    std::sort(s.begin(), s.end());
    out.push_back(std::move(s));
  }
  return out;
}

// Waiting-room contents shared by phases 2 and 3 (FSFS): the empty queue,
// orderings of ordinary sources only, and the same with the next tagged
// packet pinned to the last slot.
std::vector<std::vector<int>> fsfs_tail_queues(int n) {
  std::vector<std::vector<int>> out;
  auto base = all_ordered_selections(ordinary_sources(n), n - 1);  // lengths 0..n-1
  for (const auto& q : base) out.push_back(q);
  for (const auto& q : base) {
    auto with_next = q;
    with_next.push_back(tag::k1n);
    out.push_back(std::move(with_next));
  }
  return out;
}

bool contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::vector<int> insert_sorted(std::vector<int> v, int x) {
  v.insert(std::upper_bound(v.begin(), v.end(), x), x);
  return v;
}

std::vector<int> erase_value(std::vector<int> v, int x) {
  v.erase(std::find(v.begin(), v.end(), x));
  return v;
}

// Move the slot belonging to `src` to the back of the service-status list,
// keeping its tag.
std::vector<int> move_source_to_back(const std::vector<int>& order, int src) {
  std::vector<int> out;
  out.reserve(order.size());
  int slot = 0;
  for (int x : order) {
    if (tag::source_of(x) == src) {
      slot = x;
    } else {
      out.push_back(x);
    }
  }
  out.push_back(slot);
  return out;
}

std::vector<int> rename_slot(std::vector<int> order, int from, int to) {
  for (int& x : order) {
    if (x == from) x = to;
  }
  return order;
}

// Earliest-served source among those with a queued packet; returns its slot
// tag in the service-status list.
int pick_earliest(const std::vector<int>& order, const std::vector<int>& queue) {
  for (int h : order) {
    const int src = tag::source_of(h);
    for (int q : queue) {
      if (tag::source_of(q) == src) return h;
    }
  }
  throw std::logic_error("pick_earliest: queue empty");
}

double rate_mu(const SourceParams& p, int code) { return p.mu(tag::source_of(code)); }

}  // namespace

std::vector<PhaseState> PhaseSpaces::all() const {
  std::vector<PhaseState> out;
  out.reserve(q1.size() + q2.size() + q3.size() + q4.size());
  for (const auto* part : {&q1, &q2, &q3, &q4}) out.insert(out.end(), part->begin(), part->end());
  return out;
}

PhaseSpaces enumerate_phase_states(Policy policy, int n, int tagged) {
  check_args(n, tagged);
  PhaseSpaces out;
  const auto ordinary = ordinary_sources(n);

  switch (policy) {
    case Policy::FSFS: {
      // Phase 1: current tagged packet waits somewhere in the queue.
      std::vector<int> pool1 = ordinary;
      pool1.push_back(tag::k1c);
      for (const auto& q : all_ordered_selections(pool1, n)) {
        if (!contains(q, tag::k1c)) continue;
        for (int srv : ordinary) out.q1.push_back(PhaseState{1, {srv, {}, q}});
        out.q1.push_back(PhaseState{1, {tag::k1p, {}, q}});
      }
      // Phase 2: current tagged packet in service.
      for (const auto& q : fsfs_tail_queues(n)) out.q2.push_back(PhaseState{2, {tag::k1c, {}, q}});
      // Phase 3: between the tagged delivery and the next one.
      out.q3.push_back(PhaseState{3, {0, {}, {}}});
      out.q3.push_back(PhaseState{3, {tag::k1n, {}, {}}});
      for (int srv : ordinary) {
        for (const auto& q : fsfs_tail_queues(n)) out.q3.push_back(PhaseState{3, {srv, {}, q}});
      }
      break;
    }
    case Policy::ESFS: {
      std::vector<int> slots1 = ordinary;
      slots1.push_back(tag::k1p);
      const auto subsets = all_subsets_sorted(ordinary);
      for (const auto& h : all_permutations(slots1)) {
        for (const auto& c : subsets) {
          out.q1.push_back(PhaseState{1, {h.back(), h, insert_sorted(c, tag::k1c)}});
        }
      }
      std::vector<int> pool23 = ordinary;
      pool23.push_back(tag::k1n);
      const auto subsets23 = all_subsets_sorted(pool23);
      for (auto h : all_permutations(ordinary)) {
        h.push_back(tag::k1c);  // tagged packet in service, most recent slot
        for (const auto& c : subsets23) out.q2.push_back(PhaseState{2, {tag::k1c, h, c}});
      }
      std::vector<int> slots3 = ordinary;
      slots3.push_back(tag::k1n);
      for (const auto& h : all_permutations(slots3)) {
        out.q3.push_back(PhaseState{3, {0, h, {}}});
        if (h.back() == tag::k1n) {
          out.q3.push_back(PhaseState{3, {tag::k1n, h, {}}});
        } else {
          for (const auto& c : subsets23) out.q3.push_back(PhaseState{3, {h.back(), h, c}});
        }
      }
      break;
    }
    case Policy::SBR: {
      for (int srv : ordinary) out.q1.push_back(PhaseState{1, {srv, {}, {tag::k1c}}});
      out.q1.push_back(PhaseState{1, {tag::k1p, {}, {tag::k1c}}});
      std::vector<int> bufs = ordinary;
      bufs.push_back(tag::k1n);
      out.q2.push_back(PhaseState{2, {tag::k1c, {}, {}}});
      for (int b : bufs) out.q2.push_back(PhaseState{2, {tag::k1c, {}, {b}}});
      out.q3.push_back(PhaseState{3, {0, {}, {}}});
      out.q3.push_back(PhaseState{3, {tag::k1n, {}, {}}});
      for (int srv : ordinary) {
        out.q3.push_back(PhaseState{3, {srv, {}, {}}});
        for (int b : bufs) out.q3.push_back(PhaseState{3, {srv, {}, {b}}});
      }
      break;
    }
  }

  out.q4.push_back(sentinel_state());
  std::sort(out.q1.begin(), out.q1.end());
  std::sort(out.q2.begin(), out.q2.end());
  std::sort(out.q3.begin(), out.q3.end());
  return out;
}

namespace {

using Transition = std::pair<PhaseState, double>;

// --- FSFS ------------------------------------------------------------------

void fsfs_transitions(const SourceParams& p, int n, const PhaseState& s,
                      std::vector<Transition>& out) {
  const auto& q = s.t.queue;
  switch (s.phase) {
    case 1: {
      // A fresh tagged arrival replaces the waiting tagged packet: reset.
      out.emplace_back(sentinel_state(), p.lambda(1));
      for (int j = 2; j <= n; ++j) {
        if (contains(q, j)) continue;
        auto grown = q;
        grown.push_back(j);
        out.emplace_back(PhaseState{1, {s.t.server, {}, std::move(grown)}}, p.lambda(j));
      }
      std::vector<int> rest(q.begin() + 1, q.end());
      if (q.front() == tag::k1c) {
        out.emplace_back(PhaseState{2, {tag::k1c, {}, std::move(rest)}}, rate_mu(p, s.t.server));
      } else {
        out.emplace_back(PhaseState{1, {q.front(), {}, std::move(rest)}}, rate_mu(p, s.t.server));
      }
      return;
    }
    case 2: {
      if (q.empty() || q.back() != tag::k1n) {
        for (int j = 2; j <= n; ++j) {
          if (contains(q, j)) continue;
          auto grown = q;
          grown.push_back(j);
          out.emplace_back(PhaseState{2, {tag::k1c, {}, std::move(grown)}}, p.lambda(j));
        }
        auto grown = q;
        grown.push_back(tag::k1n);
        out.emplace_back(PhaseState{2, {tag::k1c, {}, std::move(grown)}}, p.lambda(1));
      }
      // Tagged delivery ends phase 2.
      if (q.empty()) {
        out.emplace_back(PhaseState{3, {0, {}, {}}}, p.mu(1));
      } else {
        std::vector<int> rest(q.begin() + 1, q.end());
        out.emplace_back(PhaseState{3, {q.front(), {}, std::move(rest)}}, p.mu(1));
      }
      return;
    }
    case 3: {
      if (s.t.server == 0) {
        out.emplace_back(PhaseState{3, {tag::k1n, {}, {}}}, p.lambda(1));
        for (int j = 2; j <= n; ++j) out.emplace_back(PhaseState{3, {j, {}, {}}}, p.lambda(j));
        return;
      }
      if (s.t.server == tag::k1n) {
        // Delivery of the next tagged packet: cycle over.
        out.emplace_back(sentinel_state(), p.mu(1));
        return;
      }
      if (q.empty() || q.back() != tag::k1n) {
        for (int j = 2; j <= n; ++j) {
          if (contains(q, j)) continue;
          auto grown = q;
          grown.push_back(j);
          out.emplace_back(PhaseState{3, {s.t.server, {}, std::move(grown)}}, p.lambda(j));
        }
        auto grown = q;
        grown.push_back(tag::k1n);
        out.emplace_back(PhaseState{3, {s.t.server, {}, std::move(grown)}}, p.lambda(1));
      }
      if (q.empty()) {
        out.emplace_back(PhaseState{3, {0, {}, {}}}, rate_mu(p, s.t.server));
      } else {
        std::vector<int> rest(q.begin() + 1, q.end());
        out.emplace_back(PhaseState{3, {q.front(), {}, std::move(rest)}}, rate_mu(p, s.t.server));
      }
      return;
    }
  }
}

// --- ESFS ------------------------------------------------------------------

void esfs_transitions(const SourceParams& p, int n, const PhaseState& s,
                      std::vector<Transition>& out) {
  const auto& h = s.t.order;
  const auto& q = s.t.queue;
  switch (s.phase) {
    case 1: {
      out.emplace_back(sentinel_state(), p.lambda(1));
      for (int j = 2; j <= n; ++j) {
        if (contains(q, j)) continue;
        out.emplace_back(PhaseState{1, {s.t.server, h, insert_sorted(q, j)}}, p.lambda(j));
      }
      const double mu = rate_mu(p, h.back());
      const int pick = pick_earliest(h, q);
      if (tag::source_of(pick) == 1) {
        auto order2 = rename_slot(move_source_to_back(h, 1), tag::k1p, tag::k1c);
        out.emplace_back(PhaseState{2, {tag::k1c, std::move(order2), erase_value(q, tag::k1c)}}, mu);
      } else {
        out.emplace_back(
            PhaseState{1, {pick, move_source_to_back(h, tag::source_of(pick)), erase_value(q, pick)}},
            mu);
      }
      return;
    }
    case 2: {
      for (int j = 2; j <= n; ++j) {
        if (contains(q, j)) continue;
        out.emplace_back(PhaseState{2, {tag::k1c, h, insert_sorted(q, j)}}, p.lambda(j));
      }
      if (!contains(q, tag::k1n)) {
        out.emplace_back(PhaseState{2, {tag::k1c, h, insert_sorted(q, tag::k1n)}}, p.lambda(1));
      }
      // Tagged delivery; the tagged slot now refers to the next tagged packet.
      auto order2 = rename_slot(h, tag::k1c, tag::k1n);
      if (q.empty()) {
        out.emplace_back(PhaseState{3, {0, std::move(order2), {}}}, p.mu(1));
      } else {
        const int pick = pick_earliest(order2, q);
        if (tag::source_of(pick) == 1) {
          out.emplace_back(PhaseState{3, {tag::k1n, std::move(order2), {}}}, p.mu(1));
        } else {
          out.emplace_back(PhaseState{3,
                                      {pick, move_source_to_back(order2, tag::source_of(pick)),
                                       erase_value(q, pick)}},
                           p.mu(1));
        }
      }
      return;
    }
    case 3: {
      if (s.t.server == 0) {
        for (int src = 1; src <= n; ++src) {
          auto order2 = move_source_to_back(h, src);
          out.emplace_back(PhaseState{3, {order2.back(), std::move(order2), {}}}, p.lambda(src));
        }
        return;
      }
      if (h.back() == tag::k1n) {
        out.emplace_back(sentinel_state(), p.mu(1));
        return;
      }
      for (int j = 2; j <= n; ++j) {
        if (contains(q, j)) continue;
        out.emplace_back(PhaseState{3, {s.t.server, h, insert_sorted(q, j)}}, p.lambda(j));
      }
      if (!contains(q, tag::k1n)) {
        out.emplace_back(PhaseState{3, {s.t.server, h, insert_sorted(q, tag::k1n)}}, p.lambda(1));
      }
      const double mu = rate_mu(p, h.back());
      if (q.empty()) {
        out.emplace_back(PhaseState{3, {0, h, {}}}, mu);
      } else {
        const int pick = pick_earliest(h, q);
        if (tag::source_of(pick) == 1) {
          // Once the next tagged packet enters service the rest of the queue
          // no longer matters for this cycle.
          out.emplace_back(PhaseState{3, {tag::k1n, move_source_to_back(h, 1), {}}}, mu);
        } else {
          out.emplace_back(
              PhaseState{3, {pick, move_source_to_back(h, tag::source_of(pick)), erase_value(q, pick)}},
              mu);
        }
      }
      return;
    }
  }
}

// --- SBR -------------------------------------------------------------------

void sbr_transitions(const SourceParams& p, int n, const PhaseState& s,
                     std::vector<Transition>& out) {
  const auto& q = s.t.queue;
  switch (s.phase) {
    case 1: {
      // The shared buffer holds the tagged packet; any arrival displaces it.
      out.emplace_back(sentinel_state(), p.total_arrival_rate());
      out.emplace_back(PhaseState{2, {tag::k1c, {}, {}}}, rate_mu(p, s.t.server));
      return;
    }
    case 2: {
      const int held = q.empty() ? 0 : q.front();
      for (int b : {tag::k1n}) {
        if (held != b) out.emplace_back(PhaseState{2, {tag::k1c, {}, {b}}}, p.lambda(1));
      }
      for (int b = 2; b <= n; ++b) {
        if (held != b) out.emplace_back(PhaseState{2, {tag::k1c, {}, {b}}}, p.lambda(b));
      }
      if (held == 0) {
        out.emplace_back(PhaseState{3, {0, {}, {}}}, p.mu(1));
      } else {
        out.emplace_back(PhaseState{3, {held, {}, {}}}, p.mu(1));
      }
      return;
    }
    case 3: {
      if (s.t.server == 0) {
        out.emplace_back(PhaseState{3, {tag::k1n, {}, {}}}, p.lambda(1));
        for (int j = 2; j <= n; ++j) out.emplace_back(PhaseState{3, {j, {}, {}}}, p.lambda(j));
        return;
      }
      if (s.t.server == tag::k1n) {
        out.emplace_back(sentinel_state(), p.mu(1));
        return;
      }
      const int held = q.empty() ? 0 : q.front();
      if (held != tag::k1n) {
        out.emplace_back(PhaseState{3, {s.t.server, {}, {tag::k1n}}}, p.lambda(1));
      }
      for (int b = 2; b <= n; ++b) {
        if (held != b) out.emplace_back(PhaseState{3, {s.t.server, {}, {b}}}, p.lambda(b));
      }
      if (held == 0) {
        out.emplace_back(PhaseState{3, {0, {}, {}}}, rate_mu(p, s.t.server));
      } else {
        out.emplace_back(PhaseState{3, {held, {}, {}}}, rate_mu(p, s.t.server));
      }
      return;
    }
  }
}

void phase_transitions(Policy policy, const SourceParams& p, const PhaseState& s,
                       std::vector<Transition>& out) {
  out.clear();
  const int n = p.count();
  switch (policy) {
    case Policy::FSFS: fsfs_transitions(p, n, s, out); return;
    case Policy::ESFS: esfs_transitions(p, n, s, out); return;
    case Policy::SBR: sbr_transitions(p, n, s, out); return;
  }
}

// State the cycle restarts in when the arriving tagged packet finds the
// system in observer state `s`: straight into service when idle (phase 2),
// otherwise into the waiting room (phase 1).
PhaseState entry_state(Policy policy, const ObserverState& s) {
  switch (policy) {
    case Policy::FSFS: {
      if (s.server == 0) return PhaseState{2, {tag::k1c, {}, {}}};
      const int srv = (s.server == 1) ? tag::k1p : s.server;
      auto q = s.queue;
      if (contains(q, 1)) {
        for (int& x : q) {
          if (x == 1) x = tag::k1c;  // replacement keeps the slot
        }
      } else {
        q.push_back(tag::k1c);
      }
      return PhaseState{1, {srv, {}, std::move(q)}};
    }
    case Policy::ESFS: {
      if (s.server == 0) {
        auto order = rename_slot(move_source_to_back(s.order, 1), 1, tag::k1c);
        return PhaseState{2, {tag::k1c, std::move(order), {}}};
      }
      auto order = rename_slot(s.order, 1, tag::k1p);
      auto q = s.queue;
      if (contains(q, 1)) q = erase_value(std::move(q), 1);
      q = insert_sorted(std::move(q), tag::k1c);
      const int srv = order.back();
      return PhaseState{1, {srv, std::move(order), std::move(q)}};
    }
    case Policy::SBR: {
      if (s.server == 0) return PhaseState{2, {tag::k1c, {}, {}}};
      const int srv = (s.server == 1) ? tag::k1p : s.server;
      return PhaseState{1, {srv, {}, {tag::k1c}}};
    }
  }
  throw std::logic_error("entry_state: unreachable");
}

}  // namespace

MfqModel build_mfq(Policy policy, const SourceParams& params, int tagged,
                   const ObserverChain& observer) {
  check_args(params.count(), tagged);
  const SourceParams renumbered = params.with_swapped(1, tagged);
  if (observer.policy != policy || !(observer.params == renumbered)) {
    throw std::invalid_argument("build_mfq: observer chain built for different policy or rates");
  }
  if (observer.stationary.size() != static_cast<Eigen::Index>(observer.states.size())) {
    throw std::invalid_argument("build_mfq: observer stationary vector not solved");
  }

  MfqModel model{policy, params, tagged, enumerate_phase_states(policy, params.count(), tagged),
                 {}, {}, {}, {}, {}};

  model.states.reserve(model.phases.dim_positive());
  for (const auto* part : {&model.phases.q1, &model.phases.q2, &model.phases.q3}) {
    model.states.insert(model.states.end(), part->begin(), part->end());
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(model.states.size());

  model.h = Eigen::VectorXd::Zero(dim);
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<Transition> trans;
  Eigen::VectorXd offdiag_sum = Eigen::VectorXd::Zero(dim);

  for (Eigen::Index i = 0; i < dim; ++i) {
    phase_transitions(policy, renumbered, model.states[i], trans);
    for (auto& [to, rate] : trans) {
      if (to.phase == 4) {
        model.h(i) += rate;
      } else {
        const auto j = static_cast<Eigen::Index>(model.index_of(to));
        triplets.emplace_back(i, j, rate);
        offdiag_sum(i) += rate;
      }
    }
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    triplets.emplace_back(i, i, -(offdiag_sum(i) + model.h(i)));
  }

  if (dim <= kDenseLimit) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& t : triplets) w(t.row(), t.col()) += t.value();
    model.W = Subgenerator(std::move(w));
  } else {
    Eigen::SparseMatrix<double> w(dim, dim);
    w.setFromTriplets(triplets.begin(), triplets.end());
    model.W = Subgenerator(std::move(w));
  }

  model.alpha = Eigen::RowVectorXd::Zero(dim);
  for (std::size_t k = 0; k < observer.states.size(); ++k) {
    const auto entry = entry_state(policy, observer.states[k]);
    model.alpha(static_cast<Eigen::Index>(model.index_of(entry))) += observer.stationary(k);
  }
  const double mass = model.alpha.sum();
  if (std::abs(mass - 1.0) > 1e-9) {
    std::ostringstream msg;
    msg << "build_mfq: cycle-restart weights sum to " << mass << " (missing transition row?)";
    throw std::runtime_error(msg.str());
  }

  model.beta = Eigen::VectorXd::Zero(dim);
  for (const auto& s : model.phases.q3) {
    model.beta(static_cast<Eigen::Index>(model.index_of(s))) = 1.0;
  }
  return model;
}

MfqModel build_tagged_model(Policy policy, const SourceParams& params, int tagged) {
  const ObserverChain observer = build_observer(policy, params.with_swapped(1, tagged));
  return build_mfq(policy, params, tagged, observer);
}

MfqDiagnostics validate_mfq(const MfqModel& model) {
  MfqDiagnostics diag;
  const Eigen::Index dim = static_cast<Eigen::Index>(model.states.size());
  auto flag = [&](const std::string& what) { diag.violations.push_back(what); };
  auto state_name = [&](Eigen::Index i) { return to_string(model.states[i], model.policy); };

  if (model.W.size() != dim || model.h.size() != dim || model.alpha.size() != dim ||
      model.beta.size() != dim) {
    flag("dimension mismatch between states and matrices");
    return diag;
  }

  // Sign pattern of W.
  auto check_entry = [&](Eigen::Index i, Eigen::Index j, double v) {
    if (i == j) {
      if (!(v < 0.0)) flag("nonnegative diagonal at " + state_name(i));
    } else if (v < 0.0) {
      flag("negative off-diagonal at " + state_name(i) + " -> " + state_name(j));
    }
  };
  if (model.W.is_dense()) {
    const auto& w = model.W.dense();
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (i == j || w(i, j) != 0.0) check_entry(i, j, w(i, j));
      }
    }
  } else {
    const auto& w = model.W.sparse();
    for (int k = 0; k < w.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(w, k); it; ++it) {
        check_entry(it.row(), it.col(), it.value());
      }
    }
  }

  // Row sums must cancel against the reset-entry rates.
  const Eigen::VectorXd residual = model.W.row_sums() + model.h;
  diag.max_row_residual = residual.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double tol = 1e-12 * std::max(1.0, std::abs(model.W.diagonal()(i)));
    if (std::abs(residual(i)) > tol) flag("row-sum residual at " + state_name(i));
  }
  if (model.h.minCoeff() < 0.0) flag("negative reset-entry rate");
  if (model.h.maxCoeff() <= 0.0) flag("reset-entry rates all zero");

  // Restart weights: unit mass, supported off phase 3.
  diag.alpha_mass = model.alpha.sum();
  if (std::abs(diag.alpha_mass - 1.0) > 1e-9) flag("restart weights do not sum to one");
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (model.alpha(i) < -1e-15) flag("negative restart weight at " + state_name(i));
    const bool in_q3 = model.states[i].phase == 3;
    if (in_q3 && model.alpha(i) != 0.0) flag("restart weight on phase-3 state " + state_name(i));
    if (model.beta(i) != (in_q3 ? 1.0 : 0.0)) flag("phase-3 selector wrong at " + state_name(i));
  }

  // Mean time to reset must be finite and positive from every state.
  try {
    const Eigen::VectorXd x = model.W.solve(Eigen::VectorXd::Constant(dim, -1.0));
    diag.min_expected_reset_time = x.minCoeff();
    if (!(diag.min_expected_reset_time > 0.0)) flag("nonpositive expected reset time");
  } catch (const std::exception& e) {
    flag(std::string("solve W x = -1 failed: ") + e.what());
  }
  return diag;
}

void MfqModel::dump(std::ostream& os) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    os << i << " | " << states[i].phase << " | " << to_string(states[i], policy) << '\n';
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(states.size());
  auto emit = [&](Eigen::Index i, Eigen::Index j, double v) {
    if (v != 0.0) os << "W " << i << ' ' << j << ' ' << v << '\n';
  };
  if (W.is_dense()) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < dim; ++j) emit(i, j, W.dense()(i, j));
    }
  } else {
    for (int k = 0; k < W.sparse().outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(W.sparse(), k); it; ++it) {
        emit(it.row(), it.col(), it.value());
      }
    }
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (h(i) != 0.0) os << "h " << i << ' ' << h(i) << '\n';
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (alpha(i) != 0.0) os << "alpha " << i << ' ' << alpha(i) << '\n';
  }
}

}  // namespace aoi
