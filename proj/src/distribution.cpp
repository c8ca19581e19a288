#include "aoi/distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace aoi {

namespace {
// Sub-step size for uniformization: keeps Poisson weights representable and
// the series short per step.
constexpr double kMaxStepMass = 50.0;
constexpr double kSeriesTail = 1e-16;
}  // namespace

Eigen::RowVectorXd expm_left_action(const Eigen::RowVectorXd& v, const Subgenerator& W, double x) {
  if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument("expm_left_action: x must be finite and >= 0");
  if (!v.allFinite()) throw std::invalid_argument("expm_left_action: non-finite vector");
  if (v.size() != W.size()) throw std::invalid_argument("expm_left_action: size mismatch");
  if (x == 0.0) return v;

  const double unif_rate = W.diagonal().cwiseAbs().maxCoeff();
  if (!(unif_rate > 0.0)) throw std::invalid_argument("expm_left_action: zero uniformization rate");

  const int steps = std::max(1, static_cast<int>(std::ceil(unif_rate * x / kMaxStepMass)));
  const double h = x / steps;
  const double mass = unif_rate * h;

  Eigen::RowVectorXd cur = v;
  Eigen::RowVectorXd term(v.size());
  Eigen::RowVectorXd acc(v.size());
  for (int s = 0; s < steps; ++s) {
    term = cur;
    double weight = std::exp(-mass);
    double cum = weight;
    acc = weight * term;
    const int k_max = static_cast<int>(mass + 60.0 * std::sqrt(mass + 1.0) + 60.0);
    for (int k = 1; k <= k_max && cum < 1.0 - kSeriesTail; ++k) {
      term += W.left_apply(term) / unif_rate;  // term *= I + W/rate
      weight *= mass / k;
      cum += weight;
      acc += weight * term;
    }
    cur = acc;
  }
  return cur;
}

AoiDistribution::AoiDistribution(Subgenerator W, Eigen::RowVectorXd alpha, Eigen::VectorXd beta)
    : W_(std::move(W)), alpha_(std::move(alpha)), beta_(std::move(beta)) {
  if (alpha_.size() != W_.size() || beta_.size() != W_.size()) {
    throw std::invalid_argument("AoiDistribution: size mismatch");
  }
  W_.factorize();
  winv_beta_ = W_.solve(beta_);
  const double total = -alpha_.dot(winv_beta_.transpose());
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::runtime_error("AoiDistribution: non-positive total mass");
  }
  eps_ = 1.0 / total;
}

AoiDistribution::AoiDistribution(const MfqModel& model)
    : AoiDistribution(model.W, model.alpha, model.beta) {}

double AoiDistribution::pdf(double x) const {
  if (x < 0.0) throw std::invalid_argument("pdf: x must be >= 0");
  return eps_ * expm_left_action(alpha_, W_, x).dot(beta_.transpose());
}

double AoiDistribution::violation(double gamma) const {
  if (gamma < 0.0) throw std::invalid_argument("violation: gamma must be >= 0");
  // 1 - F(x) = -eps * (alpha e^{Wx}) W^{-1} beta; evaluating it directly keeps
  // tail values accurate.
  return -eps_ * expm_left_action(alpha_, W_, gamma).dot(winv_beta_.transpose());
}

double AoiDistribution::cdf(double x) const { return 1.0 - violation(x); }

double AoiDistribution::moment(int k) const {
  if (k < 1) throw std::invalid_argument("moment: k must be >= 1");
  Eigen::VectorXd y = winv_beta_;
  for (int j = 0; j < k; ++j) y = W_.solve(y);
  const double sign = (k % 2 == 1) ? 1.0 : -1.0;
  double factorial = 1.0;
  for (int j = 2; j <= k; ++j) factorial *= j;
  return sign * factorial * eps_ * alpha_.dot(y.transpose());
}

std::vector<double> AoiDistribution::pdf_grid(const std::vector<double>& xs) const {
  std::vector<double> out(xs.size());
  Eigen::RowVectorXd v = alpha_;
  double prev = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < prev) throw std::invalid_argument("pdf_grid: grid must be ascending");
    v = expm_left_action(v, W_, xs[i] - prev);
    prev = xs[i];
    out[i] = eps_ * v.dot(beta_.transpose());
  }
  return out;
}

std::vector<double> AoiDistribution::cdf_grid(const std::vector<double>& xs) const {
  std::vector<double> out(xs.size());
  Eigen::RowVectorXd v = alpha_;
  double prev = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < prev) throw std::invalid_argument("cdf_grid: grid must be ascending");
    v = expm_left_action(v, W_, xs[i] - prev);
    prev = xs[i];
    out[i] = 1.0 + eps_ * v.dot(winv_beta_.transpose());
  }
  return out;
}

double AoiDistribution::quantile(double p) const {
  if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("quantile: p must be in (0,1)");
  double hi = std::max(mean(), 1e-9);
  int guard = 0;
  while (cdf(hi) < p) {
    hi *= 2.0;
    if (++guard > 200) throw std::runtime_error("quantile: bracket failed");
  }
  double lo = 0.0;
  for (int it = 0; it < 80 && (hi - lo) > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return hi;
}

std::vector<double> AoiDistribution::default_grid(int points) const {
  if (points < 2) throw std::invalid_argument("default_grid: need at least 2 points");
  const double x_hi = quantile(0.9999);
  std::vector<double> xs(points);
  for (int i = 0; i < points; ++i) xs[i] = x_hi * i / (points - 1);
  return xs;
}

AggregateMetrics aggregate_metrics(const std::vector<AoiDistribution>& dists,
                                   const std::vector<double>& gamma_grid) {
  if (dists.empty()) throw std::invalid_argument("aggregate_metrics: no distributions");
  AggregateMetrics out;
  out.gamma_grid = gamma_grid;
  for (const auto& d : dists) out.per_source_mean.push_back(d.mean());
  out.mean_aoi = 0.0;
  for (double m : out.per_source_mean) out.mean_aoi += m;
  out.mean_aoi /= static_cast<double>(dists.size());

  out.theta.assign(gamma_grid.size(), 0.0);
  for (const auto& d : dists) {
    const std::vector<double> tail = [&] {
      std::vector<double> t(gamma_grid.size());
      const auto cdf_vals = d.cdf_grid(gamma_grid);
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = 1.0 - cdf_vals[i];
      return t;
    }();
    for (std::size_t i = 0; i < tail.size(); ++i) out.theta[i] += tail[i];
  }
  for (double& t : out.theta) t /= static_cast<double>(dists.size());
  return out;
}

std::vector<AoiDistribution> build_all_distributions(Policy policy, const SourceParams& params) {
  std::vector<AoiDistribution> out;
  std::vector<std::pair<SourceParams, ObserverChain>> cache;
  for (int n = 1; n <= params.count(); ++n) {
    const SourceParams renumbered = params.with_swapped(1, n);
    const ObserverChain* chain = nullptr;
    for (const auto& [key, value] : cache) {
      if (key == renumbered) {
        chain = &value;
        break;
      }
    }
    if (chain == nullptr) {
      cache.emplace_back(renumbered, build_observer(policy, renumbered));
      chain = &cache.back().second;
    }
    out.emplace_back(build_mfq(policy, params, n, *chain));
  }
  return out;
}

}  // namespace aoi
