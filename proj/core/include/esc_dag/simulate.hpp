#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "esc_dag/data.hpp"
#include "esc_dag/mcd.hpp"
#include "esc_dag/posterior.hpp"
#include "esc_dag/rng.hpp"
#include "esc_dag/sampler.hpp"

namespace esc_dag {

/// Random sparse Cholesky truth: a fraction `sparsity` of the strictly lower
/// triangle is nonzero with magnitudes uniform on [coef_low, coef_high] and a
/// fair random sign; D is uniform on [d_low, d_high].
struct TruthSpec {
  int p = 300;
  double sparsity = 0.03;
  double coef_low = 0.3;
  double coef_high = 0.7;
  double d_low = 2.0;
  double d_high = 5.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// ceil(sparsity * p (p - 1) / 2), ignoring floating-point noise in the product.
long nonzero_count(int p, double sparsity);

CholeskyModel generate_truth(const TruthSpec& spec, Rng& rng);
CholeskyModel generate_truth(const TruthSpec& spec);

/// Positions (j, l), l < j, of the nonzero entries of A, row-major.
std::vector<std::pair<int, int>> support_pairs(const Eigen::MatrixXd& factor);

enum class DataLaw { Gaussian, Laplace };

/// n rows X_i = sqrt(W_i) Z_i where Z_i ~ N(0, compose(truth)^-1) is drawn by
/// the autoregressive recursion and W_i = mixing(rng). With mixing == 1 this
/// is the Gaussian law.
Eigen::MatrixXd sample_scale_mixture(int n, const CholeskyModel& truth, Rng& rng,
                                     const std::function<double(Rng&)>& mixing);

DataMatrix sample_gaussian(int n, const CholeskyModel& truth, Rng& rng);
/// Multivariate Laplace: exponential (mean 1) scale mixture, covariance Sigma_0.
DataMatrix sample_laplace(int n, const CholeskyModel& truth, Rng& rng);
DataMatrix sample_data(DataLaw law, int n, const CholeskyModel& truth, Rng& rng);

struct SelectionMetrics {
  long errors = 0;
  long true_positives = 0;
  long false_positives = 0;
  long false_negatives = 0;
  double fdr = 0.0;
  double tpr = 0.0;
  double p_bar_0 = 0.0;
  double p_bar_1 = 0.0;
  // Truth has no nonzero entry: tpr and p_bar_1 are set to 1 by convention.
  bool degenerate_truth = false;
};

/// Selected entries are those with inclusion >= threshold. Only the strictly
/// lower triangles of `truth_factor` and `inclusion` are read.
SelectionMetrics selection_metrics(const Eigen::MatrixXd& truth_factor, const Eigen::MatrixXd& inclusion,
                                   double threshold);

/// Mean of several metric records (counts averaged as reals into errors_mean).
struct MetricsSummary {
  int replicates = 0;
  double errors = 0.0;
  double fdr = 0.0;
  double tpr = 0.0;
  double p_bar_0 = 0.0;
  double p_bar_1 = 0.0;
};
MetricsSummary average(const std::vector<SelectionMetrics>& metrics);

/// One replicate of a selection study: draw a truth and data, fit, score.
struct ReplicateResult {
  SelectionMetrics metrics;
  double acceptance_rate = 0.0;
};
ReplicateResult run_replicate(int n, const TruthSpec& truth_spec, DataLaw law, const Hyperparams& hyper,
                              const ChainConfig& chain, std::uint64_t seed, int workers);

enum class RateTarget { CholeskyFactor, Precision };

struct RateProbeConfig {
  std::vector<int> n_grid{100, 200, 400};
  TruthSpec truth{100, 0.03};
  int replicates = 5;
  int draws = 20;  // posterior draws per fit
  MatrixNorm norm = MatrixNorm::Frobenius;
  RateTarget target = RateTarget::CholeskyFactor;
  DataLaw law = DataLaw::Gaussian;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct RateRow {
  int n = 0;
  double mean_error = 0.0;
  double sd_error = 0.0;  // across replicates of the per-fit mean
};

/// For each n: per replicate, a truth shared across the grid, fresh data of
/// size n, a fit, and `draws` posterior models; reports the mean
/// ||A - A0|| (or ||Omega - Omega0||) in the requested norm.
std::vector<RateRow> rate_probe(const RateProbeConfig& cfg, const Hyperparams& hyper, const ChainConfig& chain);

}  // namespace esc_dag
