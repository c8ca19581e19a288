#include "aoi/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "aoi/distribution.hpp"
#include "aoi/mfq.hpp"
#include "aoi/observer.hpp"
#include "aoi/simulator.hpp"

namespace aoi {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw CLI::ValidationError("expected a comma-separated list of numbers");
  return out;
}

std::vector<Policy> parse_policies(const std::string& s) {
  std::vector<Policy> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(policy_from_string(item));
  }
  if (out.empty()) throw CLI::ValidationError("expected a comma-separated policy list");
  return out;
}

std::pair<double, double> parse_range(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw CLI::ValidationError("range must be lo:hi");
  const double lo = std::stod(s.substr(0, colon));
  const double hi = std::stod(s.substr(colon + 1));
  if (!(lo > 0.0) || !(hi > lo)) throw CLI::ValidationError("range must satisfy 0 < lo < hi");
  return {lo, hi};
}

std::pair<int, int> parse_int_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const int v = std::stoi(s);
    return {v, v};
  }
  const int lo = std::stoi(s.substr(0, dots));
  const int hi = std::stoi(s.substr(dots + 2));
  if (lo < 1 || hi < lo) throw CLI::ValidationError("bad count range");
  return {lo, hi};
}

std::ofstream open_out(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / name);
  if (!f) throw std::runtime_error("cannot open output file: " + (dir / name).string());
  return f;
}

void write_grid_csv(std::ofstream& f, const std::vector<double>& xs,
                    const std::vector<std::vector<double>>& columns, const std::string& origin) {
  f << "x";
  for (std::size_t n = 1; n <= columns.size(); ++n) f << ",source_" << n;
  f << ",origin\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    f << fmt(xs[i]);
    for (const auto& col : columns) f << ',' << fmt(col[i]);
    f << ',' << origin << '\n';
  }
}

// Flags shared by the scenario-driven subcommands.
struct ScenarioFlags {
  std::string lambdas, mus, policies = "fsfs,esfs,sbr";
  int n = 0;
  double mu = 1.0, rho = 0.0;
  bool balanced = false;
  std::string out = ".";
  int grid_points = 400;

  void add_rate_flags(CLI::App* app) {
    app->add_option("--lambdas", lambdas, "per-source arrival rates, comma separated");
    app->add_option("--mus", mus, "per-source service rates, comma separated");
    app->add_flag("--balanced", balanced, "balanced load: lambda_n = rho/n for all sources");
    app->add_option("--n", n, "source count (balanced scenarios)");
    app->add_option("--mu", mu, "common service rate (balanced scenarios)")->capture_default_str();
    app->add_option("--rho", rho, "total system load (balanced / rho1 scenarios)");
  }
  void add_common(CLI::App* app) {
    app->add_option("--out", out, "output directory")->capture_default_str();
    app->add_option("--grid", grid_points, "number of grid points")->capture_default_str();
    app->set_config("--config", "", "flat key = value config file; flags take precedence");
  }

  SourceParams make_params() const {
    if (balanced) {
      if (n < 1 || !(rho > 0.0) || !(mu > 0.0)) {
        throw CLI::ValidationError("--balanced needs --n, --rho and --mu");
      }
      return SourceParams(std::vector<double>(static_cast<std::size_t>(n), rho / n),
                          std::vector<double>(static_cast<std::size_t>(n), mu));
    }
    if (lambdas.empty() || mus.empty()) {
      throw CLI::ValidationError("need --lambdas and --mus (or --balanced with --n/--rho/--mu)");
    }
    return SourceParams(parse_double_list(lambdas), parse_double_list(mus));
  }
};

// Shared evaluation grid: covers the 99.99% quantile of every source.
std::vector<double> common_grid(const std::vector<AoiDistribution>& dists, int points) {
  double hi = 0.0;
  for (const auto& d : dists) hi = std::max(hi, d.quantile(0.9999));
  std::vector<double> xs(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) xs[static_cast<std::size_t>(i)] = hi * i / (points - 1);
  return xs;
}

int cmd_statecount(const std::string& n_range, const std::vector<Policy>& policies,
                   const std::string& out) {
  const auto [lo, hi] = parse_int_range(n_range);
  auto f = open_out(out, "statecount.csv");
  f << "n";
  for (Policy p : policies) f << ',' << to_string(p);
  f << '\n';
  std::cout << "n";
  for (Policy p : policies) std::cout << '\t' << to_string(p);
  std::cout << '\n';
  for (int n = lo; n <= hi; ++n) {
    f << n;
    std::cout << n;
    for (Policy p : policies) {
      const int l = enumerate_phase_states(p, n, 1).dim_positive();
      f << ',' << l;
      std::cout << '\t' << l;
    }
    f << '\n';
    std::cout << '\n';
  }
  return 0;
}

int cmd_analyze(const ScenarioFlags& flags, const std::string& gammas_csv) {
  const SourceParams params = flags.make_params();
  for (Policy policy : parse_policies(flags.policies)) {
    const auto dists = build_all_distributions(policy, params);
    const auto xs = common_grid(dists, flags.grid_points);

    std::vector<std::vector<double>> cdf_cols, pdf_cols;
    for (const auto& d : dists) {
      cdf_cols.push_back(d.cdf_grid(xs));
      pdf_cols.push_back(d.pdf_grid(xs));
    }
    const std::string tag = to_string(policy);
    auto cdf_file = open_out(flags.out, "cdf_" + tag + ".csv");
    write_grid_csv(cdf_file, xs, cdf_cols, "analytic");
    auto pdf_file = open_out(flags.out, "pdf_" + tag + ".csv");
    write_grid_csv(pdf_file, xs, pdf_cols, "analytic");

    std::vector<double> gammas;
    if (!gammas_csv.empty()) {
      gammas = parse_double_list(gammas_csv);
    } else {
      for (double frac : {0.1, 0.25, 0.5, 0.75, 0.9}) gammas.push_back(frac * xs.back());
    }
    const auto agg = aggregate_metrics(dists, gammas);

    auto sum_file = open_out(flags.out, "summary_" + tag + ".csv");
    sum_file << "metric,source,value\n";
    for (std::size_t s = 0; s < dists.size(); ++s) {
      sum_file << "mean," << (s + 1) << ',' << fmt(agg.per_source_mean[s]) << '\n';
      sum_file << "second_moment," << (s + 1) << ',' << fmt(dists[s].moment(2)) << '\n';
    }
    sum_file << "mean,0," << fmt(agg.mean_aoi) << '\n';
    for (std::size_t g = 0; g < gammas.size(); ++g) {
      for (std::size_t s = 0; s < dists.size(); ++s) {
        sum_file << "violation@" << fmt(gammas[g]) << ',' << (s + 1) << ','
                 << fmt(dists[s].violation(gammas[g])) << '\n';
      }
      sum_file << "violation@" << fmt(gammas[g]) << ",0," << fmt(agg.theta[g]) << '\n';
    }
    std::cout << tag << ": mean age " << fmt(agg.mean_aoi) << " over " << dists.size()
              << " sources\n";
  }
  return 0;
}

SimConfig make_sim_config(const SourceParams& params, Policy policy, double horizon,
                          std::uint64_t events, std::uint64_t seed, double warmup,
                          std::vector<double> grid) {
  SimConfig cfg{params};
  cfg.policy = policy;
  cfg.horizon_time = horizon;
  cfg.horizon_events = events;
  cfg.seed = seed;
  cfg.warmup = warmup;
  cfg.cdf_grid = std::move(grid);
  cfg.track_observer = params.count() <= 12;
  return cfg;
}

int cmd_simulate(const ScenarioFlags& flags, double horizon, std::uint64_t events,
                 std::uint64_t seed, double warmup) {
  const SourceParams params = flags.make_params();
  for (Policy policy : parse_policies(flags.policies)) {
    const auto dists = build_all_distributions(policy, params);
    const auto xs = common_grid(dists, flags.grid_points);
    const auto result = simulate(make_sim_config(params, policy, horizon, events, seed, warmup, xs));

    const std::string tag = to_string(policy);
    auto cdf_file = open_out(flags.out, "sim_cdf_" + tag + ".csv");
    write_grid_csv(cdf_file, xs, result.per_source_cdf, "sim");

    auto sum_file = open_out(flags.out, "sim_summary_" + tag + ".csv");
    sum_file << "metric,source,value\n";
    double overall = 0.0;
    for (std::size_t s = 0; s < result.per_source_mean_aoi.size(); ++s) {
      sum_file << "mean," << (s + 1) << ',' << fmt(result.per_source_mean_aoi[s]) << '\n';
      overall += result.per_source_mean_aoi[s];
    }
    sum_file << "mean,0," << fmt(overall / static_cast<double>(params.count())) << '\n';
    sum_file << "seed,0," << seed << '\n';
    sum_file << "events,0," << result.event_count << '\n';
    sum_file << "measured_time,0," << fmt(result.measured_time) << '\n';
    std::cout << tag << ": simulated mean age " << fmt(overall / params.count()) << " ("
              << result.event_count << " events)\n";
  }
  return 0;
}

int cmd_compare(const ScenarioFlags& flags, double horizon, std::uint64_t events,
                std::uint64_t seed, double warmup, double threshold) {
  const SourceParams params = flags.make_params();
  bool all_ok = true;
  for (Policy policy : parse_policies(flags.policies)) {
    const auto dists = build_all_distributions(policy, params);
    const auto xs = common_grid(dists, flags.grid_points);
    const auto result = simulate(make_sim_config(params, policy, horizon, events, seed, warmup, xs));

    const std::string tag = to_string(policy);
    auto f = open_out(flags.out, "compare_" + tag + ".csv");
    f << "source,sup_distance,threshold,pass\n";
    for (std::size_t s = 0; s < dists.size(); ++s) {
      const auto analytic = dists[s].cdf_grid(xs);
      double sup = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sup = std::max(sup, std::abs(analytic[i] - result.per_source_cdf[s][i]));
      }
      const bool ok = sup < threshold;
      all_ok = all_ok && ok;
      f << (s + 1) << ',' << fmt(sup) << ',' << fmt(threshold) << ',' << (ok ? 1 : 0) << '\n';
      std::cout << tag << " source " << (s + 1) << ": sup distance " << fmt(sup)
                << (ok ? " (ok)" : " (EXCEEDS THRESHOLD)") << '\n';
    }
  }
  return all_ok ? 0 : 1;
}

int cmd_sweep(const ScenarioFlags& flags, const std::string& axis, const std::string& range,
              int points) {
  if (points < 2) throw CLI::ValidationError("--points must be >= 2");
  const auto [lo, hi] = parse_range(range);
  const auto policies = parse_policies(flags.policies);

  auto grid_value = [&](int i) { return lo + (hi - lo) * i / (points - 1); };

  std::string file_name, x_name;
  if (axis == "rho") {
    file_name = "sweep_rho.csv";
    x_name = "rho";
  } else if (axis == "rho1") {
    file_name = "sweep_rho1.csv";
    x_name = "rho1_ratio";
  } else if (axis == "gamma") {
    file_name = "sweep_gamma.csv";
    x_name = "gamma";
  } else {
    throw CLI::ValidationError("--axis must be rho, rho1 or gamma");
  }

  auto f = open_out(flags.out, file_name);
  f << x_name;
  for (Policy p : policies) f << ',' << to_string(p);
  f << '\n';

  if (axis == "gamma") {
    // One scenario, violation probability swept over the age threshold.
    const SourceParams params = flags.make_params();
    std::vector<double> gammas;
    for (int i = 0; i < points; ++i) gammas.push_back(grid_value(i));
    std::vector<std::vector<double>> theta;
    for (Policy p : policies) theta.push_back(aggregate_metrics(build_all_distributions(p, params), gammas).theta);
    for (int i = 0; i < points; ++i) {
      f << fmt(gammas[static_cast<std::size_t>(i)]);
      for (const auto& t : theta) f << ',' << fmt(t[static_cast<std::size_t>(i)]);
      f << '\n';
    }
    return 0;
  }

  for (int i = 0; i < points; ++i) {
    const double x = grid_value(i);
    std::optional<SourceParams> params;
    if (axis == "rho") {
      if (flags.n < 1 || !(flags.mu > 0.0)) throw CLI::ValidationError("rho sweep needs --n and --mu");
      params.emplace(std::vector<double>(static_cast<std::size_t>(flags.n), x / flags.n),
                     std::vector<double>(static_cast<std::size_t>(flags.n), flags.mu));
    } else {  // rho1: two sources, fixed total load, source-1 share x in [0.5, 1)
      if (!(flags.rho > 0.0) || !(flags.mu > 0.0)) {
        throw CLI::ValidationError("rho1 sweep needs --rho and --mu");
      }
      if (!(x >= 0.5) || !(x < 1.0)) {
        throw CLI::ValidationError("rho1 sweep range must lie in [0.5, 1)");
      }
      const double rho1 = x * flags.rho;
      params.emplace(std::vector<double>{rho1 * flags.mu, (flags.rho - rho1) * flags.mu},
                     std::vector<double>{flags.mu, flags.mu});
    }
    f << fmt(x);
    for (Policy p : policies) {
      const auto agg = aggregate_metrics(build_all_distributions(p, *params), {});
      f << ',' << fmt(agg.mean_aoi);
    }
    f << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Per-source age-of-information analysis for multi-source status-update queues"};
  app.require_subcommand(1);

  ScenarioFlags sc_analyze, sc_sim, sc_cmp, sc_sweep;
  std::string gammas, sweep_axis, sweep_range = "0.1:10", statecount_n = "2..5";
  std::string statecount_policies = "sbr,fsfs,esfs", statecount_out = ".";
  double horizon = 0.0, warmup = 0.1, threshold = 0.01;
  std::uint64_t events = 2'000'000, seed = 1;
  int sweep_points = 10;

  auto* a = app.add_subcommand("analyze", "exact per-source age distributions");
  sc_analyze.add_rate_flags(a);
  sc_analyze.add_common(a);
  a->add_option("--policies,--policy", sc_analyze.policies, "policies to evaluate")->capture_default_str();
  a->add_option("--gammas", gammas, "age thresholds for the violation summary");

  auto* s = app.add_subcommand("simulate", "discrete-event simulation of a scenario");
  sc_sim.add_rate_flags(s);
  sc_sim.add_common(s);
  s->add_option("--policies,--policy", sc_sim.policies, "policies to simulate")->capture_default_str();
  s->add_option("--horizon", horizon, "simulated time in seconds (alternative to --events)");
  s->add_option("--events", events, "event budget")->capture_default_str();
  s->add_option("--seed", seed, "RNG seed")->capture_default_str();
  s->add_option("--warmup", warmup, "leading fraction discarded")->capture_default_str();

  auto* c = app.add_subcommand("compare", "analytic vs simulated CDF sup-distance");
  sc_cmp.add_rate_flags(c);
  sc_cmp.add_common(c);
  c->add_option("--policies,--policy", sc_cmp.policies, "policies to cross-validate")->capture_default_str();
  c->add_option("--horizon", horizon, "simulated time in seconds (alternative to --events)");
  c->add_option("--events", events, "event budget")->capture_default_str();
  c->add_option("--seed", seed, "RNG seed")->capture_default_str();
  c->add_option("--warmup", warmup, "leading fraction discarded")->capture_default_str();
  c->add_option("--threshold", threshold, "maximum allowed sup-distance")->capture_default_str();

  auto* w = app.add_subcommand("sweep", "parameter sweeps (system load, load share, age threshold)");
  sc_sweep.add_rate_flags(w);
  sc_sweep.add_common(w);
  w->add_option("--policies", sc_sweep.policies, "policies to include")->capture_default_str();
  w->add_option("--axis", sweep_axis, "sweep axis: rho, rho1 or gamma")->required();
  w->add_option("--range", sweep_range, "axis range lo:hi")->capture_default_str();
  w->add_option("--points", sweep_points, "number of sweep points")->capture_default_str();

  auto* k = app.add_subcommand("statecount", "fluid model sizes per policy and source count");
  k->add_option("--n", statecount_n, "source count or range (e.g. 2..5)")->capture_default_str();
  k->add_option("--policies", statecount_policies, "policies to include")->capture_default_str();
  k->add_option("--out", statecount_out, "output directory")->capture_default_str();
  k->set_config("--config", "", "flat key = value config file; flags take precedence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (a->parsed()) return cmd_analyze(sc_analyze, gammas);
    if (s->parsed()) return cmd_simulate(sc_sim, horizon, events, seed, warmup);
    if (c->parsed()) return cmd_compare(sc_cmp, horizon, events, seed, warmup, threshold);
    if (w->parsed()) return cmd_sweep(sc_sweep, sweep_axis, sweep_range, sweep_points);
    if (k->parsed()) return cmd_statecount(statecount_n, parse_policies(statecount_policies), statecount_out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.emplace_back("aoi");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const auto& s : full) argv.push_back(s.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace aoi
