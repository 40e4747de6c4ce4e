#include <gtest/gtest.h>

#include <cmath>

#include "esc_dag/errors.hpp"
#include "esc_dag/sampler.hpp"
#include "esc_dag/simulate.hpp"
#include "oracles.hpp"

using namespace esc_dag;

namespace {

oracle::OracleHyper as_oracle(const Hyperparams& h) {
  return {h.alpha, h.gamma, h.nu0, h.c1, h.c2};
}

ChainConfig chain(long retained, long burn_in, std::uint64_t seed, InitKind init = InitKind::Empty) {
  ChainConfig cfg;
  cfg.iterations = retained + burn_in;
  cfg.burn_in = burn_in;
  cfg.seed = seed;
  cfg.init = init;
  return cfg;
}


}  // namespace

TEST(Propose, DeleteFromEmptyIsSelfProposal) {
  Rng rng(1);
  int stays = 0;
  for (int i = 0; i < 1000; ++i) {
    const Proposal q = propose(SupportSet(4), 4, rng);
    if (q.kind == MoveKind::Stay) {
      ++stays;
      EXPECT_EQ(q.log_q_ratio, 0.0);
    } else {
      EXPECT_EQ(q.kind, MoveKind::Add);
    }
  }
  EXPECT_GT(stays, 400);
  EXPECT_LT(stays, 600);
}

TEST(Propose, MoveMultiplicities) {
  // Four candidates, S = {0}: adds have three targets, the reverse delete two.
  Rng rng(2);
  const SupportSet s(4, {0});
  bool saw_add = false, saw_remove = false;
  for (int i = 0; i < 200; ++i) {
    const Proposal q = propose(s, 4, rng);
    if (q.kind == MoveKind::Add) {
      saw_add = true;
      EXPECT_FALSE(s.contains(q.index));
      EXPECT_NEAR(q.log_q_ratio, std::log(3.0 / 2.0), 1e-15);
    } else if (q.kind == MoveKind::Remove) {
      saw_remove = true;
      EXPECT_EQ(q.index, 0);
      EXPECT_NEAR(q.log_q_ratio, std::log(1.0 / 4.0), 1e-15);
    }
  }
  EXPECT_TRUE(saw_add && saw_remove);

  const SupportSet grown(4, {0, 2});
  for (int i = 0; i < 200; ++i) {
    const Proposal q = propose(grown, 4, rng);
    if (q.kind == MoveKind::Remove && q.index == 2) {
      EXPECT_NEAR(q.log_q_ratio, std::log(2.0 / 3.0), 1e-15);
    }
  }
}

TEST(Propose, AddAtCapIsSelfProposal) {
  Rng rng(3);
  const SupportSet s(6, {1, 4});
  for (int i = 0; i < 500; ++i) {
    const Proposal q = propose(s, 2, rng);
    EXPECT_NE(q.kind, MoveKind::Add);
  }
  const SupportSet full(3, {0, 1, 2});
  for (int i = 0; i < 500; ++i) EXPECT_NE(propose(full, 10, rng).kind, MoveKind::Add);
}

TEST(Propose, AddTargetsUniform) {
  Rng rng(4);
  const SupportSet s(6, {1, 4});
  std::map<int, int> counts;
  for (int i = 0; i < 40000; ++i) {
    const Proposal q = propose(s, 6, rng);
    if (q.kind == MoveKind::Add) ++counts[q.index];
  }
  ASSERT_EQ(counts.size(), 4u);
  for (const auto& [index, count] : counts) {
    EXPECT_FALSE(s.contains(index));
    EXPECT_NEAR(count / 20000.0, 0.25, 0.02);
  }
}

TEST(AcceptanceProbability, Basics) {
  EXPECT_EQ(acceptance_probability(-3.0, -3.0, 0.0), 1.0);
  EXPECT_EQ(acceptance_probability(-3.0, -std::numeric_limits<double>::infinity(), 5.0), 0.0);
  EXPECT_NEAR(acceptance_probability(0.0, -1.0, 0.25), std::exp(-0.75), 1e-15);
}

TEST(MhStep, TwoStateAcceptanceMatchesHandAssembledRatio) {
  const Eigen::MatrixXd x = oracle::random_matrix(50, 2, 14);
  const DataMatrix data(x);
  const GramKernel kernel(data);
  Hyperparams h;
  const int cap = support_cap(data, h, 1);
  ASSERT_EQ(cap, 1);

  const double empty = oracle::log_marginal(x, 1, {}, as_oracle(h), 1);
  const double full = oracle::log_marginal(x, 1, {0}, as_oracle(h), 1);
  const double expected = std::min(1.0, std::exp(full - empty));

  ChainState start = initial_state(kernel, 1, h, chain(10, 0, 0), cap);
  EXPECT_NEAR(acceptance_probability(start.score.log_score,
                                     log_marginal_support(data, SupportSet(1, {0}), h, cap).log_score, 0.0),
              expected, 1e-10);

  // From the empty state every non-stay proposal is the add of index 0.
  Rng rng(21);
  int adds = 0, accepted = 0;
  for (int i = 0; i < 200000; ++i) {
    ChainState s = start;
    const StepResult r = mh_step(s, kernel, h, cap, rng);
    if (r.proposal.kind == MoveKind::Add) {
      ++adds;
      EXPECT_EQ(r.proposal.log_q_ratio, 0.0);
      if (r.accepted) ++accepted;
    }
  }
  const double rate = static_cast<double>(accepted) / adds;
  EXPECT_NEAR(rate, expected, 4.0 * std::sqrt(expected * (1 - expected) / adds) + 1e-12);
}

TEST(MhStep, SingularProposalAlwaysRejected) {
  Eigen::MatrixXd x = oracle::random_matrix(30, 4, 6);
  x.col(2) = x.col(1);
  const DataMatrix data(x);
  const GramKernel kernel(data);
  Hyperparams h;
  ChainConfig cfg = chain(10, 0, 0, InitKind::Explicit);
  cfg.explicit_init = {{}, {}, {}, {1}};
  ChainState state = initial_state(kernel, 3, h, cfg, 3);
  Rng rng(8);
  for (int i = 0; i < 5000; ++i) {
    mh_step(state, kernel, h, 3, rng);
    ASSERT_FALSE(state.support.contains(1) && state.support.contains(2));
  }
}

TEST(MhStep, EqualScoresAlwaysAccept) {
  // Two identical predictors: swapping via remove/add has equal scores.
  Eigen::MatrixXd x = oracle::random_matrix(30, 3, 7);
  const DataMatrix data(x);
  const GramKernel kernel(data);
  Hyperparams h;
  ChainState state = initial_state(kernel, 2, h, chain(10, 0, 0), 2);
  EXPECT_EQ(acceptance_probability(state.score.log_score, state.score.log_score, 0.0), 1.0);
}

TEST(RunChain, TwoStateFrequencyMatchesBruteForce) {
  // Weak dependence so both states carry real mass.
  Eigen::MatrixXd x = oracle::random_matrix(50, 2, 99);
  x.col(1) += 0.3 * x.col(0);
  const DataMatrix data(x);
  const GramKernel kernel(data);
  Hyperparams h;
  h.c1 = 1.0;
  const auto truth = oracle::enumerate_posterior(x, 1, as_oracle(h), 1);
  const double p_full = truth.at({0});
  ASSERT_GT(p_full, 0.05);
  ASSERT_LT(p_full, 0.95);

  const ChainTrace trace = run_chain(kernel, 1, h, chain(200000, 1000, 5));
  EXPECT_NEAR(trace.inclusion(0), p_full, 0.01);
}

TEST(RunChain, SixPredictorsTotalVariation) {
  const Eigen::MatrixXd x = oracle::random_matrix(50, 7, 314);
  const DataMatrix data(x);
  const GramKernel kernel(data);
  Hyperparams h;
  ASSERT_EQ(support_cap(data, h, 6), 6);
  const auto truth = oracle::enumerate_posterior(x, 6, as_oracle(h), 6);
  const ChainTrace trace = run_chain(kernel, 6, h, chain(500000, 5000, 17));
  EXPECT_LT(oracle::total_variation(trace.empirical_distribution(), truth), 0.05);
}

TEST(RunChain, BoundaryHeavyChainStillTargetsPosterior) {
  const Eigen::MatrixXd x = oracle::random_matrix(50, 6, 2718);
  const DataMatrix data(x);
  const GramKernel kernel(data);
  Hyperparams h;
  h.r_rule = RRule::Explicit;
  h.r_explicit = {1};
  ASSERT_EQ(support_cap(data, h, 5), 1);
  const auto truth = oracle::enumerate_posterior(x, 5, as_oracle(h), 1);
  const ChainTrace trace = run_chain(kernel, 5, h, chain(300000, 2000, 23));
  for (const auto& [state, prob] : trace.empirical_distribution()) ASSERT_LE(state.size(), 1u);
  EXPECT_LT(oracle::total_variation(trace.empirical_distribution(), truth), 0.05);
}

TEST(RunChain, DeterministicAndConsistentCounters) {
  const DataMatrix data(oracle::random_matrix(40, 8, 10));
  const GramKernel kernel(data);
  Hyperparams h;
  const ChainConfig cfg = chain(3000, 500, 77, InitKind::Screening);
  const ChainTrace a = run_chain(kernel, 7, h, cfg);
  const ChainTrace b = run_chain(kernel, 7, h, cfg);
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].indices, b.runs[i].indices);
    EXPECT_EQ(a.runs[i].length, b.runs[i].length);
  }
  EXPECT_EQ(a.accept_count, b.accept_count);
  EXPECT_EQ(a.retained(), 3000);
  EXPECT_EQ(a.proposal_count, 3500);
  EXPECT_LE(a.accept_count, a.proposal_count);
  EXPECT_GE(a.acceptance_rate(), 0.0);
  EXPECT_LE(a.acceptance_rate(), 1.0);

  // Inclusion is the mean of the support indicators over retained iterations.
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(7);
  for (long t = 0; t < a.retained(); ++t) {
    const SupportSet state = a.state_at(t);
    for (int l : state.indices()) freq(l) += 1.0;
  }
  freq /= static_cast<double>(a.retained());
  EXPECT_LT((freq - a.inclusion).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RunChain, InadmissibleInitRejected) {
  const DataMatrix data(oracle::random_matrix(40, 6, 10));
  const GramKernel kernel(data);
  Hyperparams h;
  h.r_rule = RRule::Explicit;
  h.r_explicit = {1};
  ChainConfig cfg = chain(100, 10, 1, InitKind::Explicit);
  cfg.explicit_init = {{}, {}, {}, {}, {}, {0, 1, 2}};
  EXPECT_THROW(run_chain(kernel, 5, h, cfg), InvalidInit);
  EXPECT_THROW(fit_dag(data, h, cfg), ColumnFailure);
  try {
    fit_dag(data, h, cfg);
  } catch (const ColumnFailure& e) {
    EXPECT_EQ(e.column(), 5);
  }
}

TEST(RunChain, ScreeningInitRespectsCap) {
  const DataMatrix data(oracle::random_matrix(40, 12, 10));
  const GramKernel kernel(data);
  Hyperparams h;
  ChainConfig cfg = chain(10, 0, 1, InitKind::Screening);
  const ChainState s = initial_state(kernel, 11, h, cfg, 3);
  EXPECT_EQ(s.support.size(), 3);
  const ChainState wide = initial_state(kernel, 11, h, cfg, 11);
  EXPECT_EQ(wide.support.size(), 5);
}

TEST(FitDag, TwoColumnsReducesToRunChain) {
  const DataMatrix data(oracle::random_matrix(30, 2, 55));
  Hyperparams h;
  const ChainConfig cfg = chain(5000, 1000, 9);
  const DagFit fit = fit_dag(data, h, cfg);
  const ChainTrace direct = run_chain(GramKernel(data), 1, h, cfg);
  ASSERT_EQ(fit.traces.size(), 2u);
  EXPECT_EQ(fit.traces[1].accept_count, direct.accept_count);
  EXPECT_EQ(fit.inclusion(1, 0), direct.inclusion(0));
  EXPECT_EQ(fit.inclusion(0, 1), 0.0);
  ASSERT_EQ(fit.selected.size(), 1u);
  EXPECT_EQ(fit.selected[0].contains(0), direct.inclusion(0) >= cfg.threshold);
}

TEST(FitDag, WorkerCountAndColumnOrderInvariant) {
  TruthSpec spec{12, 0.2};
  spec.seed = 4;
  const CholeskyModel truth = generate_truth(spec);
  Rng rng(5);
  const DataMatrix data = sample_gaussian(60, truth, rng);
  Hyperparams h;
  const ChainConfig cfg = chain(4000, 500, 31, InitKind::Screening);
  const DagFit serial = fit_dag(data, h, cfg, 1);
  const DagFit threaded = fit_dag(data, h, cfg, 4);
  EXPECT_EQ(serial.inclusion, threaded.inclusion);

  const GramKernel kernel(data);
  for (int column = 11; column >= 1; --column) {
    const ChainTrace t = run_chain(kernel, column, h, cfg);
    const ChainTrace& ref = serial.traces[static_cast<std::size_t>(column)];
    ASSERT_EQ(t.runs.size(), ref.runs.size());
    for (std::size_t i = 0; i < t.runs.size(); ++i) {
      ASSERT_EQ(t.runs[i].indices, ref.runs[i].indices);
      ASSERT_EQ(t.runs[i].length, ref.runs[i].length);
    }
  }
}

TEST(FitDag, DeskScaleRecovery) {
  Hyperparams h;
  ChainConfig cfg;
  double tpr = 0.0;
  const int replicates = 10;
  for (int r = 0; r < replicates; ++r) {
    tpr += run_replicate(100, TruthSpec{50, 0.03}, DataLaw::Gaussian, h, cfg, 500 + r, 1).metrics.tpr;
  }
  EXPECT_GE(tpr / replicates, 0.7);
}

TEST(SamplePosteriorModel, EmptySupports) {
  const Eigen::MatrixXd x = oracle::random_matrix(80, 5, 12);
  const DataMatrix data(x);
  const GramKernel kernel(data);
  Hyperparams h;
  std::vector<SupportSet> supports;
  for (int j = 1; j < 5; ++j) supports.emplace_back(j);
  Rng rng(3);
  Eigen::VectorXd mean_d = Eigen::VectorXd::Zero(5);
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) {
    const CholeskyModel m = sample_posterior_model(kernel, supports, h, rng);
    ASSERT_TRUE(m.factor.isZero(0.0));
    ASSERT_TRUE((m.variances.array() > 0.0).all());
    mean_d += m.variances;
  }
  mean_d /= draws;
  for (int j = 0; j < 5; ++j) {
    const double d_hat = x.col(j).squaredNorm() / 80.0;
    const auto ig = d_posterior_params(d_hat, 80, h);
    EXPECT_NEAR(mean_d(j), ig.rate / (ig.shape - 1.0), 0.02 * d_hat);
  }
}

TEST(SamplePosteriorModel, CoefficientMomentsAndReproducibility) {
  const Eigen::MatrixXd x = oracle::random_matrix(60, 4, 13);
  const DataMatrix data(x);
  const GramKernel kernel(data);
  Hyperparams h;
  const std::vector<SupportSet> supports{SupportSet(1, {0}), SupportSet(2), SupportSet(3, {0, 2})};
  Rng a(44), b(44);
  const int draws = 20000;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (int i = 0; i < draws; ++i) {
    const CholeskyModel m = sample_posterior_model(kernel, supports, h, a);
    const CholeskyModel again = sample_posterior_model(kernel, supports, h, b);
    ASSERT_EQ(m.factor, again.factor);
    ASSERT_EQ(m.variances, again.variances);
    ASSERT_EQ(m.factor(3, 1), 0.0);
    mean += Eigen::Vector2d(m.factor(3, 0), m.factor(3, 2));
  }
  mean /= draws;
  const Eigen::VectorXd ls = oracle::qr_coefficients(x, 3, {0, 2});
  // sd of each coordinate is about sqrt(d / (1.1 * 60)) ~ 0.12; 20000 draws.
  EXPECT_NEAR(mean(0), ls(0), 0.01);
  EXPECT_NEAR(mean(1), ls(1), 0.01);
}
