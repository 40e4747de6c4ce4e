#include "esc_dag/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "esc_dag/errors.hpp"
#include "esc_dag/gram_kernel.hpp"

namespace esc_dag {

void TruthSpec::validate() const {
  if (p < 2) throw InvalidArgument("truth needs p >= 2");
  if (!(sparsity >= 0.0 && sparsity < 1.0)) throw InvalidArgument("sparsity must lie in [0, 1)");
  if (!(coef_low > 0.0 && coef_low < coef_high)) throw InvalidArgument("need 0 < coef_low < coef_high");
  if (!(d_low > 0.0 && d_low <= d_high)) throw InvalidArgument("need 0 < d_low <= d_high");
}

long nonzero_count(int p, double sparsity) {
  const long total = static_cast<long>(p) * (p - 1) / 2;
  const double raw = sparsity * static_cast<double>(total);
  const double nearest = std::round(raw);
  const long count = std::abs(raw - nearest) <= 1e-9 * std::max(1.0, raw) ? static_cast<long>(nearest)
                                                                         : static_cast<long>(std::ceil(raw));
  return std::min(count, total);
}

CholeskyModel generate_truth(const TruthSpec& spec, Rng& rng) {
  spec.validate();
  const int p = spec.p;
  const long total = static_cast<long>(p) * (p - 1) / 2;
  const long count = nonzero_count(p, spec.sparsity);

  // Partial Fisher-Yates over the row-major enumeration of the lower triangle.
  std::vector<long> slots(static_cast<std::size_t>(total));
  std::iota(slots.begin(), slots.end(), 0L);
  for (long i = 0; i < count; ++i) {
    const long pick = std::uniform_int_distribution<long>(i, total - 1)(rng);
    std::swap(slots[static_cast<std::size_t>(i)], slots[static_cast<std::size_t>(pick)]);
  }
  std::sort(slots.begin(), slots.begin() + count);

  CholeskyModel model{Eigen::MatrixXd::Zero(p, p), Eigen::VectorXd(p)};
  std::uniform_real_distribution<double> magnitude(spec.coef_low, spec.coef_high);
  for (long s = 0; s < count; ++s) {
    // slot index -> (j, l) with row j holding slots [j(j-1)/2, j(j+1)/2)
    const long slot = slots[static_cast<std::size_t>(s)];
    long j = static_cast<long>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(slot))) / 2.0);
    while (j * (j - 1) / 2 > slot) --j;
    while ((j + 1) * j / 2 <= slot) ++j;
    const long l = slot - j * (j - 1) / 2;
    const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    model.factor(j, l) = sign * magnitude(rng);
  }
  std::uniform_real_distribution<double> variance(spec.d_low, spec.d_high);
  for (int j = 0; j < p; ++j) model.variances(j) = spec.d_low == spec.d_high ? spec.d_low : variance(rng);
  return model;
}

CholeskyModel generate_truth(const TruthSpec& spec) {
  Rng rng(spec.seed);
  return generate_truth(spec, rng);
}

std::vector<std::pair<int, int>> support_pairs(const Eigen::MatrixXd& factor) {
  std::vector<std::pair<int, int>> pairs;
  for (Eigen::Index j = 1; j < factor.rows(); ++j) {
    for (Eigen::Index l = 0; l < j; ++l) {
      if (factor(j, l) != 0.0) pairs.emplace_back(static_cast<int>(j), static_cast<int>(l));
    }
  }
  return pairs;
}

Eigen::MatrixXd sample_scale_mixture(int n, const CholeskyModel& truth, Rng& rng,
                                     const std::function<double(Rng&)>& mixing) {
  truth.validate();
  if (n < 1) throw InvalidArgument("n must be positive");
  const Eigen::Index p = truth.dim();

  std::vector<std::vector<std::pair<Eigen::Index, double>>> parents(static_cast<std::size_t>(p));
  for (Eigen::Index j = 1; j < p; ++j) {
    for (Eigen::Index l = 0; l < j; ++l) {
      if (truth.factor(j, l) != 0.0) parents[static_cast<std::size_t>(j)].emplace_back(l, truth.factor(j, l));
    }
  }
  const Eigen::VectorXd sd = truth.variances.cwiseSqrt();

  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd row(p);
  for (int i = 0; i < n; ++i) {
    const double w = mixing(rng);
    for (Eigen::Index j = 0; j < p; ++j) {
      double mean = 0.0;
      for (const auto& [l, a] : parents[static_cast<std::size_t>(j)]) mean += a * row(l);
      row(j) = mean + sd(j) * standard_normal(rng);
    }
    x.row(i) = std::sqrt(w) * row.transpose();
  }
  return x;
}

DataMatrix sample_gaussian(int n, const CholeskyModel& truth, Rng& rng) {
  return DataMatrix(sample_scale_mixture(n, truth, rng, [](Rng&) { return 1.0; }));
}

DataMatrix sample_laplace(int n, const CholeskyModel& truth, Rng& rng) {
  return DataMatrix(sample_scale_mixture(n, truth, rng, [](Rng& r) {
    return std::exponential_distribution<double>(1.0)(r);
  }));
}

DataMatrix sample_data(DataLaw law, int n, const CholeskyModel& truth, Rng& rng) {
  return law == DataLaw::Gaussian ? sample_gaussian(n, truth, rng) : sample_laplace(n, truth, rng);
}

SelectionMetrics selection_metrics(const Eigen::MatrixXd& truth_factor, const Eigen::MatrixXd& inclusion,
                                   double threshold) {
  const Eigen::Index p = truth_factor.rows();
  if (truth_factor.cols() != p || inclusion.rows() != p || inclusion.cols() != p) {
    throw InvalidArgument("truth and inclusion matrices must both be p x p");
  }
  SelectionMetrics m;
  double sum_zero = 0.0, sum_nonzero = 0.0;
  long n_zero = 0, n_nonzero = 0;
  for (Eigen::Index j = 1; j < p; ++j) {
    for (Eigen::Index l = 0; l < j; ++l) {
      const double prob = inclusion(j, l);
      if (!(prob >= 0.0 && prob <= 1.0)) throw InvalidArgument("inclusion probabilities must lie in [0, 1]");
      const bool truth = truth_factor(j, l) != 0.0;
      const bool picked = prob >= threshold;
      if (truth) {
        ++n_nonzero;
        sum_nonzero += prob;
        picked ? ++m.true_positives : ++m.false_negatives;
      } else {
        ++n_zero;
        sum_zero += prob;
        if (picked) ++m.false_positives;
      }
    }
  }
  m.errors = m.false_positives + m.false_negatives;
  const long selected = m.true_positives + m.false_positives;
  m.fdr = selected == 0 ? 0.0 : static_cast<double>(m.false_positives) / static_cast<double>(selected);
  m.p_bar_0 = n_zero == 0 ? 0.0 : sum_zero / static_cast<double>(n_zero);
  if (n_nonzero == 0) {
    m.degenerate_truth = true;
    m.tpr = 1.0;
    m.p_bar_1 = 1.0;
  } else {
    m.tpr = static_cast<double>(m.true_positives) / static_cast<double>(n_nonzero);
    m.p_bar_1 = sum_nonzero / static_cast<double>(n_nonzero);
  }
  return m;
}

MetricsSummary average(const std::vector<SelectionMetrics>& metrics) {
  MetricsSummary s;
  s.replicates = static_cast<int>(metrics.size());
  if (metrics.empty()) return s;
  for (const auto& m : metrics) {
    s.errors += static_cast<double>(m.errors);
    s.fdr += m.fdr;
    s.tpr += m.tpr;
    s.p_bar_0 += m.p_bar_0;
    s.p_bar_1 += m.p_bar_1;
  }
  const double k = static_cast<double>(metrics.size());
  s.errors /= k;
  s.fdr /= k;
  s.tpr /= k;
  s.p_bar_0 /= k;
  s.p_bar_1 /= k;
  return s;
}

ReplicateResult run_replicate(int n, const TruthSpec& truth_spec, DataLaw law, const Hyperparams& hyper,
                              const ChainConfig& chain, std::uint64_t seed, int workers) {
  TruthSpec spec = truth_spec;
  spec.seed = derive_seed(seed, 1);
  const CholeskyModel truth = generate_truth(spec);
  Rng data_rng(derive_seed(seed, 2));
  const DataMatrix data = sample_data(law, n, truth, data_rng);
  ChainConfig cfg = chain;
  cfg.seed = derive_seed(seed, 3);
  const DagFit fit = fit_dag(data, hyper, cfg, workers);

  ReplicateResult out;
  out.metrics = selection_metrics(truth.factor, fit.inclusion, cfg.threshold);
  long accepted = 0, proposed = 0;
  for (const auto& trace : fit.traces) {
    accepted += trace.accept_count;
    proposed += trace.proposal_count;
  }
  out.acceptance_rate = proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  return out;
}

std::vector<RateRow> rate_probe(const RateProbeConfig& cfg, const Hyperparams& hyper, const ChainConfig& chain) {
  if (cfg.n_grid.empty() || !std::is_sorted(cfg.n_grid.begin(), cfg.n_grid.end())) {
    throw InvalidArgument("n_grid must be nonempty and increasing");
  }
  if (cfg.replicates < 1 || cfg.draws < 1) throw InvalidArgument("replicates and draws must be positive");

  std::vector<RateRow> rows;
  for (std::size_t g = 0; g < cfg.n_grid.size(); ++g) {
    const int n = cfg.n_grid[g];
    std::vector<double> per_fit;
    for (int r = 0; r < cfg.replicates; ++r) {
      TruthSpec spec = cfg.truth;
      spec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r), 1);
      const CholeskyModel truth = generate_truth(spec);
      const Eigen::MatrixXd truth_omega = compose(truth);

      Rng data_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r), 1000 + static_cast<std::uint64_t>(n)));
      const DataMatrix data = sample_data(cfg.law, n, truth, data_rng);
      ChainConfig chain_cfg = chain;
      chain_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r), 2000 + static_cast<std::uint64_t>(n));
      const DagFit fit = fit_dag(data, hyper, chain_cfg, cfg.workers);

      const GramKernel kernel(data);
      Rng draw_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r), 3000 + static_cast<std::uint64_t>(n)));
      double total = 0.0;
      for (int d = 0; d < cfg.draws; ++d) {
        const std::vector<SupportSet> supports = sample_trace_supports(fit, draw_rng);
        const CholeskyModel draw = sample_posterior_model(kernel, supports, hyper, draw_rng);
        total += cfg.target == RateTarget::CholeskyFactor ? matrix_norm(draw.factor - truth.factor, cfg.norm)
                                                          : matrix_norm(compose(draw) - truth_omega, cfg.norm);
      }
      per_fit.push_back(total / cfg.draws);
    }
    RateRow row;
    row.n = n;
    row.mean_error = std::accumulate(per_fit.begin(), per_fit.end(), 0.0) / static_cast<double>(per_fit.size());
    double var = 0.0;
    for (double e : per_fit) var += (e - row.mean_error) * (e - row.mean_error);
    row.sd_error = per_fit.size() > 1 ? std::sqrt(var / static_cast<double>(per_fit.size() - 1)) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace esc_dag
