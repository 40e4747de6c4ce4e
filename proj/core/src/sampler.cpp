#include "esc_dag/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "esc_dag/errors.hpp"
#include "esc_dag/parallel.hpp"

namespace esc_dag {

void ChainConfig::validate() const {
  if (iterations <= 0) throw InvalidArgument("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) throw InvalidArgument("burn_in must lie in [0, iterations)");
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidArgument("threshold must lie in (0, 1)");
  if (init == InitKind::Screening && screening_k < 0) throw InvalidArgument("screening k must be >= 0");
}

long ChainTrace::retained() const {
  long total = 0;
  for (const auto& run : runs) total += run.length;
  return total;
}

double ChainTrace::acceptance_rate() const {
  return proposal_count == 0 ? 0.0 : static_cast<double>(accept_count) / static_cast<double>(proposal_count);
}

SupportSet ChainTrace::state_at(long t) const {
  for (const auto& run : runs) {
    if (t < run.length) return SupportSet(column, run.indices);
    t -= run.length;
  }
  throw InvalidArgument("trace position out of range");
}

std::map<std::vector<int>, double> ChainTrace::empirical_distribution() const {
  std::map<std::vector<int>, double> freq;
  const double total = static_cast<double>(retained());
  for (const auto& run : runs) freq[run.indices] += static_cast<double>(run.length) / total;
  return freq;
}

Proposal propose(const SupportSet& support, int cap, Rng& rng) {
  const int size = support.size();
  const int absent = support.column() - size;
  Proposal out;
  if (uniform01(rng) < 0.5) {
    if (size == 0) return out;
    out.kind = MoveKind::Remove;
    out.index = support.indices()[static_cast<std::size_t>(uniform_index(rng, size))];
    out.log_q_ratio = std::log(static_cast<double>(size) / (absent + 1));
  } else {
    if (size >= cap || absent == 0) return out;
    int rank = uniform_index(rng, absent);
    // rank-th index not in the support
    auto members = support.indices();
    std::size_t m = 0;
    int candidate = 0;
    for (;; ++candidate) {
      if (m < members.size() && members[m] == candidate) {
        ++m;
        continue;
      }
      if (rank-- == 0) break;
    }
    out.kind = MoveKind::Add;
    out.index = candidate;
    out.log_q_ratio = std::log(static_cast<double>(absent) / (size + 1));
  }
  return out;
}

double acceptance_probability(double current_log_score, double proposed_log_score, double log_q_ratio) {
  if (proposed_log_score == -std::numeric_limits<double>::infinity()) return 0.0;
  const double log_ratio = proposed_log_score - current_log_score + log_q_ratio;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

StepResult mh_step(ChainState& state, const GramKernel& kernel, const Hyperparams& hyper, int cap, Rng& rng) {
  StepResult result;
  result.proposal = propose(state.support, cap, rng);
  const Proposal& move = result.proposal;

  FitSummary candidate;
  SupportScore score;
  if (move.kind != MoveKind::Stay) {
    try {
      candidate = move.kind == MoveKind::Add ? kernel.add(state.fit, move.index) : kernel.remove(state.fit, move.index);
      score = log_marginal_support(candidate, kernel.data(), hyper, cap);
    } catch (const SingularGram&) {
      score = SupportScore{};
    }
  }

  const double u = uniform01(rng);
  if (move.kind == MoveKind::Stay) return result;
  if (u < acceptance_probability(state.score.log_score, score.log_score, move.log_q_ratio)) {
    state.support = move.kind == MoveKind::Add ? state.support.with(move.index) : state.support.without(move.index);
    state.fit = std::move(candidate);
    state.score = score;
    result.accepted = true;
  }
  return result;
}

int support_cap(const DataMatrix& data, const Hyperparams& hyper, int column) {
  return default_R(static_cast<int>(data.n()), static_cast<int>(data.p()), hyper, column);
}

namespace {

std::vector<int> screening_order(const GramKernel& kernel, int column) {
  const auto& gram = kernel.gram();
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(static_cast<std::size_t>(column));
  for (int l = 0; l < column; ++l) {
    const double denom = std::sqrt(gram(l, l) * gram(column, column));
    ranked.emplace_back(denom > 0.0 ? std::abs(gram(l, column)) / denom : 0.0, l);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<int> order;
  order.reserve(ranked.size());
  for (const auto& [corr, l] : ranked) order.push_back(l);
  return order;
}

}  // namespace

ChainState initial_state(const GramKernel& kernel, int column, const Hyperparams& hyper,
                         const ChainConfig& cfg, int cap) {
  const DataMatrix& data = kernel.data();
  ChainState state;
  state.support = SupportSet(column);
  state.fit = kernel.fit(state.support);

  if (cfg.init == InitKind::Explicit) {
    std::vector<int> wanted;
    if (static_cast<std::size_t>(column) < cfg.explicit_init.size()) wanted = cfg.explicit_init[static_cast<std::size_t>(column)];
    try {
      state.support = SupportSet(column, wanted);
      state.fit = kernel.fit(state.support);
    } catch (const Error& e) {
      throw InvalidInit("initial support " + state.support.to_string() + " for column " + std::to_string(column) +
                        " is inadmissible: " + e.what());
    }
  } else if (cfg.init == InitKind::Screening) {
    const int k = std::min(cfg.screening_k, cap);
    for (int l : screening_order(kernel, column)) {
      if (state.support.size() >= k) break;
      try {
        FitSummary grown = kernel.add(state.fit, l);
        if (!(grown.d_hat() > 0.0)) continue;
        state.fit = std::move(grown);
        state.support = state.support.with(l);
      } catch (const SingularGram&) {
      }
    }
  }

  state.score = log_marginal_support(state.fit, data, hyper, cap);
  if (!state.score.admissible()) {
    throw InvalidInit("initial support " + state.support.to_string() + " for column " + std::to_string(column) +
                      " has zero posterior mass");
  }
  return state;
}

ChainTrace run_chain(const GramKernel& kernel, int column, const Hyperparams& hyper, const ChainConfig& cfg) {
  cfg.validate();
  hyper.validate();
  const DataMatrix& data = kernel.data();
  if (column < 1 || column >= data.p()) throw InvalidArgument("column out of range");

  const int cap = support_cap(data, hyper, column);
  ChainState state = initial_state(kernel, column, hyper, cfg, cap);
  Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(column)));

  ChainTrace trace;
  trace.column = column;
  for (long t = 0; t < cfg.iterations; ++t) {
    const StepResult step = mh_step(state, kernel, hyper, cap, rng);
    ++trace.proposal_count;
    if (step.accepted) ++trace.accept_count;
    if (t < cfg.burn_in) continue;
    const auto current = state.support.indices();
    if (trace.runs.empty() || !std::equal(current.begin(), current.end(), trace.runs.back().indices.begin(),
                                          trace.runs.back().indices.end())) {
      trace.runs.push_back({std::vector<int>(current.begin(), current.end()), 0});
    }
    ++trace.runs.back().length;
  }

  trace.inclusion = Eigen::VectorXd::Zero(column);
  for (const auto& run : trace.runs) {
    for (int l : run.indices) trace.inclusion(l) += static_cast<double>(run.length);
  }
  trace.inclusion /= static_cast<double>(trace.retained());
  return trace;
}

std::vector<SupportSet> threshold_supports(const Eigen::MatrixXd& inclusion, double threshold) {
  const Eigen::Index p = inclusion.rows();
  std::vector<SupportSet> out;
  out.reserve(static_cast<std::size_t>(std::max<Eigen::Index>(p - 1, 0)));
  for (Eigen::Index j = 1; j < p; ++j) {
    std::vector<int> picked;
    for (Eigen::Index l = 0; l < j; ++l) {
      if (inclusion(j, l) >= threshold) picked.push_back(static_cast<int>(l));
    }
    out.emplace_back(static_cast<int>(j), std::move(picked));
  }
  return out;
}

DagFit fit_dag(const DataMatrix& data, const Hyperparams& hyper, const ChainConfig& cfg, int workers) {
  cfg.validate();
  hyper.validate();
  const GramKernel kernel(data);
  const Eigen::Index p = data.p();

  DagFit fit;
  fit.traces.resize(static_cast<std::size_t>(p));
  parallel_for(static_cast<std::size_t>(p - 1), workers, [&](std::size_t i) {
    const int column = static_cast<int>(i) + 1;
    try {
      fit.traces[static_cast<std::size_t>(column)] = run_chain(kernel, column, hyper, cfg);
    } catch (const std::exception& e) {
      throw ColumnFailure(column, e.what());
    }
  });

  fit.inclusion = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 1; j < p; ++j) {
    fit.inclusion.row(j).head(j) = fit.traces[static_cast<std::size_t>(j)].inclusion.transpose();
  }
  fit.selected = threshold_supports(fit.inclusion, cfg.threshold);
  return fit;
}

CholeskyModel sample_posterior_model(const GramKernel& kernel, std::span<const SupportSet> supports,
                                     const Hyperparams& hyper, Rng& rng) {
  const DataMatrix& data = kernel.data();
  const Eigen::Index p = data.p();
  const int n = static_cast<int>(data.n());
  if (static_cast<Eigen::Index>(supports.size()) != p - 1) {
    throw InvalidArgument("expected one support per column 1..p-1");
  }

  CholeskyModel model{Eigen::MatrixXd::Zero(p, p), Eigen::VectorXd::Zero(p)};
  model.variances(0) = sample_d(data.column(0).squaredNorm() / n, n, hyper, rng);
  for (Eigen::Index j = 1; j < p; ++j) {
    const SupportSet& support = supports[static_cast<std::size_t>(j - 1)];
    if (support.column() != j) throw InvalidArgument("support column mismatch");
    const FitSummary fit = kernel.fit(support);
    const double d = sample_d(fit.d_hat(), n, hyper, rng);
    model.variances(j) = d;
    if (support.empty()) continue;
    const Eigen::VectorXd a = sample_a(fit, d, hyper, rng);
    for (int k = 0; k < support.size(); ++k) model.factor(j, support.indices()[static_cast<std::size_t>(k)]) = a(k);
  }
  return model;
}

std::vector<SupportSet> sample_trace_supports(const DagFit& fit, Rng& rng) {
  std::vector<SupportSet> out;
  for (std::size_t j = 1; j < fit.traces.size(); ++j) {
    const ChainTrace& trace = fit.traces[j];
    out.push_back(trace.state_at(std::uniform_int_distribution<long>(0, trace.retained() - 1)(rng)));
  }
  return out;
}

}  // namespace esc_dag
