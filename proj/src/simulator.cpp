#include "aoi/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace aoi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxTrackedSources = 12;  // observer keys are bit-packed

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Exact time-below-threshold accounting for a unit-slope sawtooth: each
// segment starts at some age and grows linearly for dt seconds. Grid sweeps
// use difference arrays so a segment costs O(log G).
class SawtoothAccumulator {
 public:
  explicit SawtoothAccumulator(const std::vector<double>& grid)
      : grid_(grid),
        count_diff_(grid.size() + 1, 0.0),
        start_age_diff_(grid.size() + 1, 0.0),
        full_dt_diff_(grid.size() + 1, 0.0) {}

  void add(double start_age, double dt) {
    integral_ += dt * start_age + 0.5 * dt * dt;
    if (grid_.empty()) return;
    const auto i1 = static_cast<std::size_t>(
        std::upper_bound(grid_.begin(), grid_.end(), start_age) - grid_.begin());
    const auto i2 = static_cast<std::size_t>(
        std::lower_bound(grid_.begin(), grid_.end(), start_age + dt) - grid_.begin());
    if (i1 < i2) {
      count_diff_[i1] += 1.0;
      count_diff_[i2] -= 1.0;
      start_age_diff_[i1] += start_age;
      start_age_diff_[i2] -= start_age;
    }
    if (i2 < grid_.size()) full_dt_diff_[i2] += dt;
  }

  double integral() const { return integral_; }

  // Total time spent at or below each grid age.
  std::vector<double> time_below() const {
    std::vector<double> out(grid_.size());
    double count = 0.0, ages = 0.0, full = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      count += count_diff_[i];
      ages += start_age_diff_[i];
      full += full_dt_diff_[i];
      out[i] = grid_[i] * count - ages + full;
    }
    return out;
  }

 private:
  const std::vector<double>& grid_;
  std::vector<double> count_diff_, start_age_diff_, full_dt_diff_;
  double integral_ = 0.0;
};

struct ObserverTracker {
  std::unordered_map<std::uint64_t, std::size_t> slot_of;
  std::vector<StateTuple> states;
  std::vector<double> dwell;
  std::vector<std::vector<std::uint64_t>> arrivals;  // [source][slot]

  std::size_t intern(std::uint64_t key, const StateTuple& build) {
    auto [it, inserted] = slot_of.try_emplace(key, states.size());
    if (inserted) {
      states.push_back(build);
      dwell.push_back(0.0);
      for (auto& row : arrivals) row.push_back(0);
    }
    return it->second;
  }
};

void validate_config(const SimConfig& cfg) {
  if (cfg.horizon_events == 0 && !(cfg.horizon_time > 0.0)) {
    throw std::invalid_argument("simulate: need a positive time horizon or an event budget");
  }
  if (!(cfg.warmup >= 0.0) || cfg.warmup >= 0.5) {
    throw std::invalid_argument("simulate: warmup fraction must lie in [0, 0.5)");
  }
  for (std::size_t i = 0; i < cfg.cdf_grid.size(); ++i) {
    if (cfg.cdf_grid[i] < 0.0 || (i > 0 && cfg.cdf_grid[i] <= cfg.cdf_grid[i - 1])) {
      throw std::invalid_argument("simulate: cdf grid must be nonnegative and strictly increasing");
    }
  }
  if (cfg.track_observer && cfg.params.count() > kMaxTrackedSources) {
    throw std::invalid_argument("simulate: observer tracking supports at most 12 sources");
  }
}

}  // namespace

std::vector<double> SimResult::pooled_arrival_seen() const {
  std::vector<double> out(observer_states.size(), 0.0);
  double total = 0.0;
  for (const auto& row : arrival_seen) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out[i] += static_cast<double>(row[i]);
      total += static_cast<double>(row[i]);
    }
  }
  if (total > 0.0) {
    for (double& v : out) v /= total;
  }
  return out;
}

SimResult simulate(const SimConfig& cfg) {
  validate_config(cfg);
  const int n = cfg.params.count();
  std::mt19937_64 rng(splitmix64(cfg.seed));
  auto draw_exp = [&rng](double rate) {
    return std::exponential_distribution<double>(rate)(rng);
  };

  // Server and waiting-room state.
  bool busy = false;
  int srv_src = 0;
  double srv_gen = 0.0, srv_end = kInf;
  std::vector<char> has(n + 1, 0);       // per-source slot occupied (FSFS/ESFS)
  std::vector<double> gen(n + 1, 0.0);   // generation stamp of the waiting packet
  std::vector<int> fifo;                 // FSFS service order
  std::vector<int> order;                // ESFS service status, back = most recent
  int buf_src = 0;                       // SBR shared slot
  double buf_gen = 0.0;

  if (cfg.policy == Policy::ESFS) {
    for (int i = 1; i <= n; ++i) order.push_back(i);
  }

  std::vector<double> next_arrival(n + 1, 0.0);
  for (int i = 1; i <= n; ++i) next_arrival[i] = draw_exp(cfg.params.lambda(i));

  // Age accounting.
  std::vector<SawtoothAccumulator> age(static_cast<std::size_t>(n),
                                       SawtoothAccumulator(cfg.cdf_grid));
  std::vector<double> reset_time(n + 1, 0.0), reset_age(n + 1, 0.0);
  std::vector<std::uint64_t> deliveries(n + 1, 0);

  ObserverTracker tracker;
  if (cfg.track_observer) tracker.arrivals.assign(static_cast<std::size_t>(n), {});

  auto observer_key = [&]() -> std::uint64_t {
    std::uint64_t key = 0;
    switch (cfg.policy) {
      case Policy::FSFS:
        key = static_cast<std::uint64_t>(busy ? srv_src : 0);
        key = key * 16 + fifo.size();
        for (int s : fifo) key = key * 16 + static_cast<std::uint64_t>(s);
        return key;
      case Policy::ESFS:
        for (int s : order) key = key * 16 + static_cast<std::uint64_t>(s);
        for (int i = 1; i <= n; ++i) key = key * 2 + (has[i] ? 1 : 0);
        return key * 2 + (busy ? 1 : 0);
      case Policy::SBR:
        return static_cast<std::uint64_t>(busy ? srv_src : 0) * 16 +
               static_cast<std::uint64_t>(buf_src);
    }
    return key;
  };
  auto observer_tuple = [&]() -> StateTuple {
    switch (cfg.policy) {
      case Policy::FSFS: return StateTuple{busy ? srv_src : 0, {}, fifo};
      case Policy::ESFS: {
        std::vector<int> queued;
        for (int i = 1; i <= n; ++i) {
          if (has[i]) queued.push_back(i);
        }
        return StateTuple{busy ? order.back() : 0, order, std::move(queued)};
      }
      case Policy::SBR:
        return StateTuple{busy ? srv_src : 0, {}, buf_src ? std::vector<int>{buf_src} : std::vector<int>{}};
    }
    return {};
  };

  std::size_t cur_slot = 0;
  if (cfg.track_observer) cur_slot = tracker.intern(observer_key(), observer_tuple());

  auto check_invariants = [&]() {
    if (!cfg.check_invariants) return;
    if (cfg.policy == Policy::ESFS) {
      auto sorted = order;
      std::sort(sorted.begin(), sorted.end());
      for (int i = 1; i <= n; ++i) {
        if (sorted[static_cast<std::size_t>(i) - 1] != i) {
          throw std::logic_error("simulate: service-status list is not a permutation");
        }
      }
    }
    if (cfg.policy == Policy::FSFS) {
      std::vector<char> seen(n + 1, 0);
      for (int s : fifo) {
        if (seen[s] || !has[s]) throw std::logic_error("simulate: corrupt FSFS queue");
        seen[s] = 1;
      }
    }
  };

  const bool event_mode = cfg.horizon_events > 0;
  const std::uint64_t warmup_events =
      event_mode ? static_cast<std::uint64_t>(cfg.warmup * static_cast<double>(cfg.horizon_events))
                 : 0;
  double measure_start = event_mode ? kInf : cfg.warmup * cfg.horizon_time;
  std::uint64_t processed = 0, measured_events = 0;
  double last_time = 0.0;
  double end_time = 0.0;

  auto start_service = [&](int src, double g, double now) {
    busy = true;
    srv_src = src;
    srv_gen = g;
    srv_end = now + draw_exp(cfg.params.mu(src));
    if (cfg.policy == Policy::ESFS) {
      order.erase(std::find(order.begin(), order.end(), src));
      order.push_back(src);
    }
  };

  auto account_delivery_segment = [&](int src, double now) {
    const double lo = std::max(reset_time[src], measure_start);
    if (now > lo) {
      age[static_cast<std::size_t>(src) - 1].add(reset_age[src] + (lo - reset_time[src]), now - lo);
    }
  };

  while (true) {
    // Next event: earliest pending arrival vs. service completion; ties go to
    // the completion, then to the lowest source index.
    double t_arr = kInf;
    int arr_src = 0;
    for (int i = 1; i <= n; ++i) {
      if (next_arrival[i] < t_arr) {
        t_arr = next_arrival[i];
        arr_src = i;
      }
    }
    const bool completion = busy && srv_end <= t_arr;
    const double t = completion ? srv_end : t_arr;

    if (!event_mode && t > cfg.horizon_time) {
      end_time = cfg.horizon_time;
      break;
    }
    if (event_mode && measure_start == kInf && processed >= warmup_events) measure_start = t;

    if (cfg.track_observer && t > measure_start) {
      tracker.dwell[cur_slot] += t - std::max(last_time, measure_start);
    }
    if (t >= measure_start) ++measured_events;

    if (completion) {
      account_delivery_segment(srv_src, t);
      reset_time[srv_src] = t;
      reset_age[srv_src] = t - srv_gen;
      if (t >= measure_start) ++deliveries[srv_src];
      busy = false;
      srv_end = kInf;
      switch (cfg.policy) {
        case Policy::FSFS:
          if (!fifo.empty()) {
            const int next = fifo.front();
            fifo.erase(fifo.begin());
            has[next] = 0;
            start_service(next, gen[next], t);
          }
          break;
        case Policy::ESFS:
          for (int s : order) {
            if (has[s]) {
              has[s] = 0;
              start_service(s, gen[s], t);
              break;
            }
          }
          break;
        case Policy::SBR:
          if (buf_src != 0) {
            const int next = buf_src;
            buf_src = 0;
            start_service(next, buf_gen, t);
          }
          break;
      }
    } else {
      if (cfg.track_observer && t >= measure_start) {
        ++tracker.arrivals[static_cast<std::size_t>(arr_src) - 1][cur_slot];
      }
      next_arrival[arr_src] = t + draw_exp(cfg.params.lambda(arr_src));
      if (!busy) {
        start_service(arr_src, t, t);
      } else {
        switch (cfg.policy) {
          case Policy::FSFS:
            if (has[arr_src]) {
              gen[arr_src] = t;  // replacement keeps the service slot
            } else {
              has[arr_src] = 1;
              gen[arr_src] = t;
              fifo.push_back(arr_src);
            }
            break;
          case Policy::ESFS:
            has[arr_src] = 1;
            gen[arr_src] = t;
            break;
          case Policy::SBR:
            buf_src = arr_src;  // any arrival displaces the held packet
            buf_gen = t;
            break;
        }
      }
    }

    check_invariants();
    if (cfg.track_observer) cur_slot = tracker.intern(observer_key(), observer_tuple());
    last_time = t;
    ++processed;
    if (event_mode && processed >= cfg.horizon_events) {
      end_time = t;
      break;
    }
  }

  if (!(measure_start < end_time)) {
    throw std::runtime_error("simulate: horizon too small to cover the measurement window");
  }
  const double duration = end_time - measure_start;

  // Close open segments and the final dwell interval.
  for (int i = 1; i <= n; ++i) account_delivery_segment(i, end_time);
  if (cfg.track_observer && end_time > measure_start) {
    tracker.dwell[cur_slot] += end_time - std::max(last_time, measure_start);
  }

  SimResult out;
  out.cdf_grid = cfg.cdf_grid;
  out.event_count = measured_events;
  out.measured_time = duration;
  for (int i = 1; i <= n; ++i) {
    const auto& acc = age[static_cast<std::size_t>(i) - 1];
    out.per_source_mean_aoi.push_back(acc.integral() / duration);
    auto below = acc.time_below();
    for (double& v : below) v /= duration;
    out.per_source_cdf.push_back(std::move(below));
    out.per_source_deliveries.push_back(deliveries[i]);
  }
  if (cfg.track_observer) {
    for (const auto& s : tracker.states) out.observer_states.push_back(to_string(s, cfg.policy));
    out.observer_occupancy = tracker.dwell;
    for (double& v : out.observer_occupancy) v /= duration;
    out.arrival_seen = tracker.arrivals;
  }
  return out;
}

ReplicateSummary replicate(const SimConfig& cfg, int runs) {
  if (runs < 1) throw std::invalid_argument("replicate: runs must be >= 1");
  ReplicateSummary out;
  for (int r = 0; r < runs; ++r) {
    SimConfig c = cfg;
    c.seed = splitmix64(cfg.seed + static_cast<std::uint64_t>(r));
    out.runs.push_back(simulate(c));
  }

  const int n = cfg.params.count();
  out.mean_per_source_aoi.assign(static_cast<std::size_t>(n), 0.0);
  out.stderr_per_source_aoi.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<double> overall;
  for (const auto& run : out.runs) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      out.mean_per_source_aoi[static_cast<std::size_t>(i)] += run.per_source_mean_aoi[static_cast<std::size_t>(i)];
      sum += run.per_source_mean_aoi[static_cast<std::size_t>(i)];
    }
    overall.push_back(sum / n);
  }
  for (double& v : out.mean_per_source_aoi) v /= runs;
  out.mean_overall_aoi = 0.0;
  for (double v : overall) out.mean_overall_aoi += v;
  out.mean_overall_aoi /= runs;

  if (runs > 1) {
    for (int i = 0; i < n; ++i) {
      double ss = 0.0;
      for (const auto& run : out.runs) {
        const double d = run.per_source_mean_aoi[static_cast<std::size_t>(i)] -
                         out.mean_per_source_aoi[static_cast<std::size_t>(i)];
        ss += d * d;
      }
      out.stderr_per_source_aoi[static_cast<std::size_t>(i)] =
          std::sqrt(ss / (runs - 1)) / std::sqrt(static_cast<double>(runs));
    }
    double ss = 0.0;
    for (double v : overall) ss += (v - out.mean_overall_aoi) * (v - out.mean_overall_aoi);
    out.stderr_overall_aoi = std::sqrt(ss / (runs - 1)) / std::sqrt(static_cast<double>(runs));
  }
  return out;
}

}  // namespace aoi
