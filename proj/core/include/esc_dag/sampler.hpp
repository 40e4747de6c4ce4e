#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "esc_dag/data.hpp"
#include "esc_dag/gram_kernel.hpp"
#include "esc_dag/mcd.hpp"
#include "esc_dag/posterior.hpp"
#include "esc_dag/rng.hpp"

namespace esc_dag {

enum class InitKind { Empty, Screening, Explicit };

struct ChainConfig {
  long iterations = 24000;
  long burn_in = 4000;
  InitKind init = InitKind::Screening;
  int screening_k = 5;
  // Initial supports by column (zero-based) when init == Explicit; columns
  // past the end start empty.
  std::vector<std::vector<int>> explicit_init;
  std::uint64_t seed = 0;
  double threshold = 0.5;

  void validate() const;
};

/// Maximal stretch of consecutive retained iterations spent in one support.
struct SupportRun {
  std::vector<int> indices;
  long length = 0;
};

struct ChainTrace {
  int column = 0;
  std::vector<SupportRun> runs;  // post-burn-in, run-length encoded
  long accept_count = 0;
  long proposal_count = 0;
  Eigen::VectorXd inclusion;  // length == column

  long retained() const;
  double acceptance_rate() const;
  /// Support visited at retained iteration t (0 <= t < retained()).
  SupportSet state_at(long t) const;
  /// Visit frequency of every support seen after burn-in.
  std::map<std::vector<int>, double> empirical_distribution() const;
};

enum class MoveKind { Add, Remove, Stay };

struct Proposal {
  MoveKind kind = MoveKind::Stay;
  int index = -1;
  double log_q_ratio = 0.0;  // log q(S | S') - log q(S' | S)
};

/// Single-flip proposal: with probability 1/2 delete a uniformly chosen member
/// of S, otherwise add a uniformly chosen absent index. Deleting from the
/// empty set or adding at `cap` (or with nothing left to add) stays put.
Proposal propose(const SupportSet& support, int cap, Rng& rng);

/// Chain state: current support, its cached fit and score.
struct ChainState {
  SupportSet support;
  FitSummary fit;
  SupportScore score;
};

struct StepResult {
  Proposal proposal;
  bool accepted = false;
};

/// min{1, exp(proposed - current + log_q_ratio)}; 0 when proposed is -inf.
double acceptance_probability(double current_log_score, double proposed_log_score, double log_q_ratio);

/// One Metropolis-Hastings step. Always consumes exactly one uniform draw for
/// the accept decision, after the proposal draws.
StepResult mh_step(ChainState& state, const GramKernel& kernel, const Hyperparams& hyper, int cap, Rng& rng);

/// Effective support-size cap for a column: default_R already folds in j and n - 2.
int support_cap(const DataMatrix& data, const Hyperparams& hyper, int column);

/// Initial support for a column according to cfg.init. Throws InvalidInit
/// when the result is inadmissible.
ChainState initial_state(const GramKernel& kernel, int column, const Hyperparams& hyper,
                         const ChainConfig& cfg, int cap);

/// Runs cfg.iterations MH steps for one column with its own generator seeded
/// by derive_seed(cfg.seed, column). Throws InvalidInit.
ChainTrace run_chain(const GramKernel& kernel, int column, const Hyperparams& hyper, const ChainConfig& cfg);

struct DagFit {
  std::vector<ChainTrace> traces;      // index = column; traces[0] is empty
  std::vector<SupportSet> selected;    // index = column - 1
  Eigen::MatrixXd inclusion;           // p x p, strictly lower triangular
};

/// Independent chains for columns 1..p-1. Output does not depend on
/// `workers`. Per-column failures are rethrown as ColumnFailure.
DagFit fit_dag(const DataMatrix& data, const Hyperparams& hyper, const ChainConfig& cfg, int workers = 1);

/// Supports with inclusion >= threshold, one per column 1..p-1.
std::vector<SupportSet> threshold_supports(const Eigen::MatrixXd& inclusion, double threshold);

/// One posterior draw of (A, D) given a support for every column 1..p-1
/// (supports[i].column() == i + 1): d_j from its inverse-gamma conditional,
/// then a_{S_j} given d_j.
CholeskyModel sample_posterior_model(const GramKernel& kernel, std::span<const SupportSet> supports,
                                     const Hyperparams& hyper, Rng& rng);

/// Supports drawn from each column's retained trace, uniformly over iterations.
std::vector<SupportSet> sample_trace_supports(const DagFit& fit, Rng& rng);

}  // namespace esc_dag
