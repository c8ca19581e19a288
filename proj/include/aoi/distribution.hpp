#pragma once
// Matrix-exponential age distribution of one source: density
// f(x) = eps * alpha * e^{Wx} * beta with eps normalizing the total mass.
// Exponential actions use uniformization (no full matrix exponentials);
// powers of W^{-1} come from reused LU solves.

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "aoi/mfq.hpp"
#include "aoi/subgenerator.hpp"

namespace aoi {

// Left action v * e^{Wx} by Poisson-weighted (uniformized) series, stepped so
// each sub-step stays well conditioned. Returns v unchanged for x = 0.
Eigen::RowVectorXd expm_left_action(const Eigen::RowVectorXd& v, const Subgenerator& W, double x);

class AoiDistribution {
 public:
  AoiDistribution(Subgenerator W, Eigen::RowVectorXd alpha, Eigen::VectorXd beta);
  explicit AoiDistribution(const MfqModel& model);

  double pdf(double x) const;
  double cdf(double x) const;
  double violation(double gamma) const;  // Pr{age > gamma} = 1 - cdf, no cancellation
  double moment(int k) const;            // k-th non-central moment, k >= 1
  double mean() const { return moment(1); }

  // Batched evaluation over an ascending grid; one incremental exponential
  // action per step instead of one per point.
  std::vector<double> pdf_grid(const std::vector<double>& xs) const;
  std::vector<double> cdf_grid(const std::vector<double>& xs) const;

  // Smallest x with cdf(x) >= p, bracketed by doubling and refined by
  // bisection.
  double quantile(double p) const;

  // Uniform grid of `points` values on [0, quantile(0.9999)].
  std::vector<double> default_grid(int points = 400) const;

  double epsilon() const { return eps_; }
  Eigen::Index dim() const { return W_.size(); }
  const Eigen::RowVectorXd& alpha() const { return alpha_; }
  const Eigen::VectorXd& beta() const { return beta_; }
  const Subgenerator& W() const { return W_; }

 private:
  Subgenerator W_;
  Eigen::RowVectorXd alpha_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd winv_beta_;  // W^{-1} beta, cached for cdf/violation
  double eps_ = 0.0;
};

// Cross-source aggregates: the plain average of per-source means and of the
// per-source violation probabilities.
struct AggregateMetrics {
  std::vector<double> per_source_mean;
  double mean_aoi = 0.0;
  std::vector<double> gamma_grid;
  std::vector<double> theta;  // averaged violation probability per grid value

  double theta_at(std::size_t i) const { return theta.at(i); }
};

AggregateMetrics aggregate_metrics(const std::vector<AoiDistribution>& dists,
                                   const std::vector<double>& gamma_grid);

// Distributions for every source of the system, reusing observer chains when
// the renumbered rate vectors coincide (balanced scenarios).
std::vector<AoiDistribution> build_all_distributions(Policy policy, const SourceParams& params);

}  // namespace aoi
