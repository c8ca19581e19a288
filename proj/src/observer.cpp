#include "aoi/observer.hpp"

#include <numeric>
#include <ostream>
#include <sstream>

namespace aoi {

namespace {

// Ordered selections (m-permutations, m = 0..limit) of `pool`, in generation
// order; callers sort the resulting states anyway.
void ordered_selections(const std::vector<int>& pool, int limit, std::vector<int>& cur,
                        const std::vector<char>& used, std::vector<std::vector<int>>& out) {
  out.push_back(cur);
  if (static_cast<int>(cur.size()) == limit) return;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (used[i]) continue;
    auto used2 = used;
    used2[i] = 1;
    cur.push_back(pool[i]);
    ordered_selections(pool, limit, cur, used2, out);
    cur.pop_back();
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

std::vector<std::vector<int>> all_subsets(const std::vector<int>& pool) {
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

void check_source_count(int n) {
  if (n < 1) throw std::invalid_argument("source count must be >= 1");
  if (n > tag::kMaxSources) throw std::invalid_argument("source count exceeds supported maximum");
}

std::vector<int> sources_upto(int n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 1);
  return v;
}

// Move the entry equal to `who` to the back, shifting the tail left.
std::vector<int> move_to_back(const std::vector<int>& order, int who) {
  std::vector<int> out;
  out.reserve(order.size());
  for (int x : order) {
    if (x != who) out.push_back(x);
  }
  out.push_back(who);
  return out;
}

}  // namespace

std::vector<ObserverState> enumerate_observer_states(Policy policy, int n) {
  check_source_count(n);
  std::vector<ObserverState> out;
  const auto srcs = sources_upto(n);

  switch (policy) {
    case Policy::FSFS: {
      out.push_back(ObserverState{0, {}, {}});
      const auto queues = all_ordered_selections(srcs, n);
      for (int i = 1; i <= n; ++i) {
        for (const auto& q : queues) out.push_back(ObserverState{i, {}, q});
      }
      break;
    }
    case Policy::ESFS: {
      const auto perms = all_permutations(srcs);
      const auto sets = all_subsets(srcs);
      for (const auto& h : perms) {
        out.push_back(ObserverState{0, h, {}});  // idle, service status preserved
        for (const auto& c : sets) out.push_back(ObserverState{h.back(), h, c});
      }
      break;
    }
    case Policy::SBR: {
      out.push_back(ObserverState{0, {}, {}});
      for (int i = 1; i <= n; ++i) {
        out.push_back(ObserverState{i, {}, {}});
        for (int j = 1; j <= n; ++j) out.push_back(ObserverState{i, {}, {j}});
      }
      break;
    }
  }

  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Outgoing transitions of one observer state under the policy's table.
void observer_transitions(Policy policy, const SourceParams& p, const ObserverState& s,
                          std::vector<std::pair<ObserverState, double>>& out) {
  const int n = p.count();
  out.clear();

  switch (policy) {
    case Policy::FSFS: {
      if (s.server == 0) {
        for (int i = 1; i <= n; ++i) out.emplace_back(ObserverState{i, {}, {}}, p.lambda(i));
        return;
      }
      // Arrivals of sources without a queued packet join at the back;
      // arrivals of queued sources replace in place (no state change).
      for (int j = 1; j <= n; ++j) {
        if (std::find(s.queue.begin(), s.queue.end(), j) != s.queue.end()) continue;
        auto q = s.queue;
        q.push_back(j);
        out.emplace_back(ObserverState{s.server, {}, std::move(q)}, p.lambda(j));
      }
      // Service completion: head of the queue is served next.
      if (s.queue.empty()) {
        out.emplace_back(ObserverState{0, {}, {}}, p.mu(s.server));
      } else {
        std::vector<int> rest(s.queue.begin() + 1, s.queue.end());
        out.emplace_back(ObserverState{s.queue.front(), {}, std::move(rest)}, p.mu(s.server));
      }
      return;
    }
    case Policy::ESFS: {
      if (s.server == 0) {
        // Idle: an arrival starts service immediately and the service status
        // is updated at service start.
        for (int i = 1; i <= n; ++i) {
          auto h = move_to_back(s.order, i);
          out.emplace_back(ObserverState{i, std::move(h), {}}, p.lambda(i));
        }
        return;
      }
      for (int j = 1; j <= n; ++j) {
        if (std::binary_search(s.queue.begin(), s.queue.end(), j)) continue;
        auto c = s.queue;
        c.insert(std::upper_bound(c.begin(), c.end(), j), j);
        out.emplace_back(ObserverState{s.server, s.order, std::move(c)}, p.lambda(j));
      }
      const double mu = p.mu(s.order.back());
      if (s.queue.empty()) {
        out.emplace_back(ObserverState{0, s.order, {}}, mu);
      } else {
        // Select the queued source served longest ago.
        int pick = 0;
        for (int h : s.order) {
          if (std::binary_search(s.queue.begin(), s.queue.end(), h)) {
            pick = h;
            break;
          }
        }
        auto c = s.queue;
        c.erase(std::find(c.begin(), c.end(), pick));
        out.emplace_back(ObserverState{pick, move_to_back(s.order, pick), std::move(c)}, mu);
      }
      return;
    }
    case Policy::SBR: {
      if (s.server == 0) {
        for (int i = 1; i <= n; ++i) out.emplace_back(ObserverState{i, {}, {}}, p.lambda(i));
        return;
      }
      if (s.queue.empty()) {
        for (int j = 1; j <= n; ++j) out.emplace_back(ObserverState{s.server, {}, {j}}, p.lambda(j));
        out.emplace_back(ObserverState{0, {}, {}}, p.mu(s.server));
      } else {
        const int b = s.queue.front();
        for (int k = 1; k <= n; ++k) {
          if (k == b) continue;  // same-source replacement keeps the state
          out.emplace_back(ObserverState{s.server, {}, {k}}, p.lambda(k));
        }
        out.emplace_back(ObserverState{b, {}, {}}, p.mu(s.server));
      }
      return;
    }
  }
}

}  // namespace

ObserverChain build_observer_generator(Policy policy, const SourceParams& params) {
  ObserverChain chain{policy, params, enumerate_observer_states(policy, params.count()), {}, {}};

  std::vector<std::pair<ObserverState, double>> trans;
  for (std::size_t i = 0; i < chain.states.size(); ++i) {
    observer_transitions(policy, params, chain.states[i], trans);
    for (auto& [to, rate] : trans) {
      const std::size_t j = chain.index_of(to);
      if (j == i) throw std::logic_error("observer transition must change the state");
      chain.rates.push_back(RateEntry{static_cast<int>(i), static_cast<int>(j), rate});
    }
  }
  return chain;
}

Eigen::MatrixXd ObserverChain::generator() const {
  const Eigen::Index k = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(k, k);
  for (const auto& e : rates) q(e.from, e.to) += e.rate;
  for (Eigen::Index i = 0; i < k; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j != i) row += q(i, j);
    }
    q(i, i) = -row;
  }
  return q;
}

void ObserverChain::dump(std::ostream& os) const {
  for (const auto& e : rates) {
    os << to_string(states[e.from], policy) << " | " << to_string(states[e.to], policy) << " | "
       << e.rate << '\n';
  }
}

Eigen::VectorXd stationary_distribution(const ObserverChain& chain) {
  const Eigen::Index k = static_cast<Eigen::Index>(chain.states.size());
  if (k == 1) return Eigen::VectorXd::Ones(1);

  const Eigen::MatrixXd q = chain.generator();
  // pi Q = 0 with sum(pi) = 1: transpose, replace the last balance equation
  // by the normalization row.
  Eigen::MatrixXd a = q.transpose();
  a.row(k - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  b(k - 1) = 1.0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd pi = lu.solve(b);
  // One step of iterative refinement keeps the balance residual near
  // round-off even for stiff rate mixes.
  pi += lu.solve(b - a * pi);

  const double residual = (pi.transpose() * q).cwiseAbs().maxCoeff();
  const double mass_err = std::abs(pi.sum() - 1.0);
  if (!pi.allFinite() || residual > 1e-10 || mass_err > 1e-12) {
    std::ostringstream msg;
    msg << "stationary_distribution: solve failed (residual " << residual << ", mass error "
        << mass_err << ")";
    throw std::runtime_error(msg.str());
  }
  return pi;
}

ObserverChain build_observer(Policy policy, const SourceParams& params) {
  ObserverChain chain = build_observer_generator(policy, params);
  chain.stationary = stationary_distribution(chain);
  return chain;
}

}  // namespace aoi
