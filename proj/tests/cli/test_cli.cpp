#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "esc_dag/errors.hpp"
#include "esc_dag/sampler.hpp"
#include "esc_dag/simulate.hpp"
#include "esc_dag_cli/commands.hpp"
#include "esc_dag_cli/config.hpp"
#include "esc_dag_cli/csv.hpp"

using namespace esc_dag;
using namespace esc_dag::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::temp_directory_path() / "esc_dag_cli_tests" / info->name() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

long count_lines(const fs::path& path) {
  const std::string text = slurp(path);
  return static_cast<long>(std::count(text.begin(), text.end(), '\n'));
}

RunConfig quick(const fs::path& out) {
  RunConfig c;
  c.out = out.string();
  c.workers = 1;
  c.chain.iterations = 1500;
  c.chain.burn_in = 200;
  return c;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(ESC_DAG_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Config, DefaultRoundTripIsByteIdentical) {
  const std::string text = emit_config(RunConfig{});
  EXPECT_EQ(emit_config(parse_config(text)), text);
}

TEST(Config, RandomConfigsRoundTrip) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    RunConfig c;
    c.seed = rng();
    c.workers = uniform_index(rng, 9);
    c.out = "dir_" + std::to_string(trial);
    c.io.data = "x.csv";
    c.io.standardize = uniform01(rng) < 0.5;
    c.io.draws = uniform_index(rng, 5);
    c.n = 2 + uniform_index(rng, 500);
    c.data_law = uniform01(rng) < 0.5 ? DataLaw::Gaussian : DataLaw::Laplace;
    c.truth.p = 2 + uniform_index(rng, 400);
    c.truth.sparsity = uniform01(rng);
    c.hyper.alpha = uniform01(rng);
    c.hyper.gamma = std::exp(standard_normal(rng));
    c.hyper.c1 = uniform01(rng) * 1e-3;
    c.hyper.c3 = 1.0 / 3.0;
    c.hyper.r_rule = static_cast<RRule>(uniform_index(rng, 3));
    c.hyper.r_explicit = {1, 2, 3};
    c.hyper.variant = uniform01(rng) < 0.5 ? PriorVariant::ESC : PriorVariant::MESC;
    c.chain.iterations = 1 + uniform_index(rng, 100000);
    c.chain.init = static_cast<InitKind>(uniform_index(rng, 3));
    c.chain.explicit_init = {{}, {0}, {0, 1}};
    c.chain.threshold = uniform01(rng);
    c.replicate.alpha = {0.999, 0.8, uniform01(rng)};
    c.replicate.data_law = {DataLaw::Laplace, DataLaw::Gaussian};
    c.rate.norm = static_cast<MatrixNorm>(uniform_index(rng, 4));
    c.rate.target = uniform01(rng) < 0.5 ? RateTarget::Precision : RateTarget::CholeskyFactor;
    const std::string text = emit_config(c);
    const RunConfig back = parse_config(text);
    ASSERT_EQ(emit_config(back), text);
    ASSERT_EQ(back.seed, c.seed);
    ASSERT_EQ(back.hyper.alpha, c.hyper.alpha);
    ASSERT_EQ(back.truth.sparsity, c.truth.sparsity);
    ASSERT_EQ(back.replicate.alpha, c.replicate.alpha);
  }
}

TEST(Config, PartialFileKeepsDefaults) {
  const RunConfig c = parse_config(R"({"seed": 7, "hyper": {"alpha": 0.5}})");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.hyper.alpha, 0.5);
  EXPECT_EQ(c.hyper.gamma, 0.1);
  EXPECT_EQ(c.chain.iterations, 24000);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config(R"({"hyper": {"alhpa": 0.5}})"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"hyper": {"r_rule": "sometimes"}})"), InvalidArgument);
  EXPECT_THROW(parse_config(R"({"n": "many"})"), InvalidArgument);
  EXPECT_THROW(parse_config("{not json"), InvalidArgument);
}

TEST(Config, WorkersFallBackToEnvironment) {
  ::setenv("ESC_DAG_WORKERS", "3", 1);
  EXPECT_EQ(resolve_workers(0), 3);
  EXPECT_EQ(resolve_workers(2), 2);
  ::setenv("ESC_DAG_WORKERS", "zero", 1);
  EXPECT_THROW(resolve_workers(0), InvalidArgument);
  ::unsetenv("ESC_DAG_WORKERS");
  EXPECT_GE(resolve_workers(0), 1);
}

TEST(Csv, MatrixRoundTripIsExact) {
  const fs::path dir = scratch("m");
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd m(1 + uniform_index(rng, 6), 1 + uniform_index(rng, 6));
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = standard_normal(rng) * std::pow(10.0, uniform_index(rng, 40) - 20);
    m(0) = std::numeric_limits<double>::denorm_min();
    if (m.size() > 1) m(1) = -std::numeric_limits<double>::max();
    write_matrix_csv(dir / "m.csv", m);
    const Eigen::MatrixXd back = read_matrix_csv(dir / "m.csv");
    ASSERT_EQ(back.rows(), m.rows());
    ASSERT_EQ(back.cols(), m.cols());
    ASSERT_TRUE((back.array() == m.array()).all());
  }
}

TEST(Csv, TripletRoundTrip) {
  const fs::path dir = scratch("t");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(1, 0) = 0.1;
  a(3, 2) = -1.0 / 3.0;
  write_triplets(dir / "a.csv", a, "value", false);
  EXPECT_EQ(count_lines(dir / "a.csv"), 3);
  EXPECT_EQ(read_triplets(dir / "a.csv", "value", 4), a);
  write_triplets(dir / "all.csv", a, "prob", true);
  EXPECT_EQ(count_lines(dir / "all.csv"), 7);
  EXPECT_EQ(read_triplets(dir / "all.csv", "prob", 4), a);
}

TEST(Csv, MalformedInputReportsLine) {
  const fs::path dir = scratch("bad");
  write_text(dir / "ragged.csv", "1,2,3\n4,5,6\n7,8\n");
  try {
    read_matrix_csv(dir / "ragged.csv");
    FAIL();
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  write_text(dir / "text.csv", "1,2\n\n3,abc\n");
  try {
    read_matrix_csv(dir / "text.csv");
    FAIL();
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("abc"), std::string::npos);
  }
  write_text(dir / "upper.csv", "j,l,value\n2,1,0.5\n2,3,0.1\n");
  EXPECT_THROW(read_triplets(dir / "upper.csv", "value", 3), CsvError);
}

TEST(Simulate, WritesShapedFiles) {
  const fs::path dir = scratch("sim");
  RunConfig c = quick(dir);
  c.truth.p = 50;
  c.n = 100;
  std::ostringstream log;
  ASSERT_EQ(cmd_simulate(c, log), 0);
  const Eigen::MatrixXd x = read_matrix_csv(dir / "data.csv");
  EXPECT_EQ(x.rows(), 100);
  EXPECT_EQ(x.cols(), 50);
  EXPECT_EQ(read_vector_csv(dir / "truth_D.csv", "d").size(), 50);
  EXPECT_TRUE(fs::exists(dir / "truth_A.csv"));
  EXPECT_TRUE(fs::exists(dir / "provenance.json"));
}

TEST(Simulate, SameSeedSameBytes) {
  const fs::path a = scratch("a"), b = scratch("b");
  RunConfig c = quick(a);
  c.seed = 42;
  std::ostringstream log;
  cmd_simulate(c, log);
  c.out = b.string();
  cmd_simulate(c, log);
  for (const char* f : {"truth_A.csv", "truth_D.csv", "data.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  c.seed = 43;
  cmd_simulate(c, log);
  EXPECT_NE(slurp(a / "data.csv"), slurp(b / "data.csv"));
}

TEST(Simulate, TripletCountAtThreeHundredVariables) {
  const fs::path dir = scratch("big");
  RunConfig c = quick(dir);
  c.truth.p = 300;
  c.truth.sparsity = 0.03;
  c.n = 2;
  std::ostringstream log;
  cmd_simulate(c, log);
  EXPECT_EQ(count_lines(dir / "truth_A.csv"), 1 + 1346);
}

TEST(Fit, TwoVariableToy) {
  const fs::path dir = scratch("toy");
  write_text(dir / "x.csv", "1,2\n2,3.9\n3,6.2\n4,8.1\n5,9.7\n");
  RunConfig c = quick(dir / "out");
  c.io.data = (dir / "x.csv").string();
  std::ostringstream log;
  ASSERT_EQ(cmd_fit(c, log), 0);
  EXPECT_EQ(count_lines(dir / "out" / "inclusion.csv"), 2);
  const std::string summary = slurp(dir / "out" / "summary.json");
  const auto pos = summary.find("\"acceptance_rate\": ");
  ASSERT_NE(pos, std::string::npos);
  const double rate = std::stod(summary.substr(pos + 19));
  EXPECT_GE(rate, 0.0);
  EXPECT_LE(rate, 1.0);
}

TEST(Fit, MatchesInProcessFit) {
  const fs::path dir = scratch("e2e");
  RunConfig c = quick(dir / "sim");
  c.truth.p = 15;
  c.truth.sparsity = 0.2;
  c.n = 60;
  c.seed = 5;
  std::ostringstream log;
  cmd_simulate(c, log);

  TruthSpec spec = c.truth;
  spec.seed = truth_seed(c.seed);
  const CholeskyModel truth = generate_truth(spec);
  Rng rng(data_seed(c.seed));
  const DataMatrix data = sample_data(c.data_law, c.n, truth, rng);
  EXPECT_TRUE((read_matrix_csv(dir / "sim" / "data.csv").array() == data.values().array()).all());
  EXPECT_EQ(read_triplets(dir / "sim" / "truth_A.csv", "value", 15), truth.factor);

  RunConfig f = quick(dir / "fit");
  f.io.data = (dir / "sim" / "data.csv").string();
  f.seed = 77;
  f.workers = 2;
  cmd_fit(f, log);
  ChainConfig chain = f.chain;
  chain.seed = 77;
  const DagFit expected = fit_dag(data, f.hyper, chain, 1);
  EXPECT_EQ(read_triplets(dir / "fit" / "inclusion.csv", "prob", 15), expected.inclusion);
}

TEST(Fit, WritesPosteriorDraws) {
  const fs::path dir = scratch("draws");
  RunConfig c = quick(dir / "sim");
  c.truth.p = 6;
  c.truth.sparsity = 0.4;
  std::ostringstream log;
  cmd_simulate(c, log);
  RunConfig f = quick(dir / "fit");
  f.io.data = (dir / "sim" / "data.csv").string();
  f.io.draws = 2;
  cmd_fit(f, log);
  for (const char* name : {"A_1.csv", "D_2.csv", "Omega_2.csv"}) EXPECT_TRUE(fs::exists(dir / "fit" / "draws" / name));
  const Eigen::MatrixXd omega = read_matrix_csv(dir / "fit" / "draws" / "Omega_1.csv");
  EXPECT_EQ(omega.rows(), 6);
  EXPECT_LT((omega - omega.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Evaluate, PerfectAndPartial) {
  const fs::path dir = scratch("ev");
  Eigen::MatrixXd truth = Eigen::MatrixXd::Zero(3, 3);
  truth(1, 0) = 0.5;
  truth(2, 0) = -0.4;
  write_triplets(dir / "truth" / "truth_A.csv", truth, "value", false);
  write_vector_csv(dir / "truth" / "truth_D.csv", Eigen::Vector3d(1, 2, 3), "d");
  Eigen::MatrixXd inclusion = Eigen::MatrixXd::Zero(3, 3);
  inclusion(1, 0) = 0.9;
  inclusion(2, 1) = 0.6;
  write_triplets(dir / "inc.csv", inclusion, "prob", true);

  RunConfig c = quick(dir / "out");
  c.io.truth = (dir / "truth").string();
  c.io.inclusion = (dir / "inc.csv").string();
  std::ostringstream log;
  ASSERT_EQ(cmd_evaluate(c, log), 0);
  const std::string metrics = slurp(dir / "out" / "metrics.json");
  EXPECT_NE(metrics.find("\"errors\": 2"), std::string::npos);
  EXPECT_NE(metrics.find("\"fdr\": 0.5"), std::string::npos);
  EXPECT_NE(metrics.find("\"tpr\": 0.5"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / "metrics.txt"));

  write_triplets(dir / "perfect.csv", (truth.array() != 0.0).cast<double>().matrix(), "prob", true);
  c.io.inclusion = (dir / "perfect.csv").string();
  cmd_evaluate(c, log);
  EXPECT_NE(slurp(dir / "out" / "metrics.json").find("\"errors\": 0"), std::string::npos);
}

TEST(Evaluate, DimensionMismatchFails) {
  const fs::path dir = scratch("mm");
  write_triplets(dir / "truth" / "truth_A.csv", Eigen::MatrixXd::Zero(3, 3), "value", false);
  write_vector_csv(dir / "truth" / "truth_D.csv", Eigen::Vector3d(1, 2, 3), "d");
  write_triplets(dir / "inc.csv", Eigen::MatrixXd::Zero(4, 4), "prob", true);
  RunConfig c = quick(dir / "out");
  c.io.truth = (dir / "truth").string();
  c.io.inclusion = (dir / "inc.csv").string();
  std::ostringstream log;
  EXPECT_THROW(cmd_evaluate(c, log), InvalidArgument);
  EXPECT_NE(run_cli("evaluate --truth " + c.io.truth + " --inclusion " + c.io.inclusion + " --out " + c.out,
                    dir / "log.txt"),
            0);
}

TEST(Replicate, SingleCellIsSimulateFitEvaluate) {
  const fs::path dir = scratch("cell");
  RunConfig c = quick(dir / "rep");
  c.seed = 12;
  c.hyper.c1 = 1.0;
  c.replicate = ReplicateGrid{{60}, {12}, {0.15}, {0.999}, {DataLaw::Gaussian}, 1};
  c.truth.p = 12;
  c.truth.sparsity = 0.15;
  c.n = 60;
  std::ostringstream log;
  ASSERT_EQ(cmd_replicate(c, log), 0);

  const std::uint64_t seed = replicate_seed(c.seed, 0, 0);
  RunConfig sim = c;
  sim.out = (dir / "sim").string();
  sim.seed = seed;
  cmd_simulate(sim, log);
  RunConfig fit = c;
  fit.out = (dir / "fit").string();
  fit.io.data = (dir / "sim" / "data.csv").string();
  fit.seed = replicate_chain_seed(seed);
  cmd_fit(fit, log);
  RunConfig ev = c;
  ev.out = (dir / "ev").string();
  ev.io.truth = sim.out;
  ev.io.inclusion = (dir / "fit" / "inclusion.csv").string();
  cmd_evaluate(ev, log);

  EXPECT_EQ(count_lines(dir / "rep" / "replicates.csv"), 2);
  std::ifstream in(dir / "rep" / "replicates.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  const std::string metrics = slurp(dir / "ev" / "metrics.json");
  const auto field = [&](const std::string& key) {
    const auto pos = metrics.find("\"" + key + "\": ");
    return metrics.substr(pos + key.size() + 4, metrics.find_first_of(",\n", pos) - pos - key.size() - 4);
  };
  std::stringstream cells(row);
  std::vector<std::string> parts;
  for (std::string cell; std::getline(cells, cell, ',');) parts.push_back(cell);
  ASSERT_GE(parts.size(), 9u);
  EXPECT_EQ(parts[2], std::to_string(seed));
  EXPECT_EQ(parts[3], field("errors"));
  EXPECT_EQ(std::stod(parts[7]), std::stod(field("fdr")));
  EXPECT_EQ(std::stod(parts[8]), std::stod(field("tpr")));
}

TEST(Replicate, AlphaSweepShapeAndDeterminism) {
  const fs::path a = scratch("a"), b = scratch("b");
  RunConfig c = quick(a);
  c.replicate = ReplicateGrid{{40}, {8}, {0.2}, {0.999, 0.8, 0.6, 0.4, 0.2}, {DataLaw::Laplace}, 2};
  std::ostringstream log;
  ASSERT_EQ(cmd_replicate(c, log), 0);
  EXPECT_EQ(count_lines(a / "table.csv"), 6);
  c.out = b.string();
  c.workers = 3;
  cmd_replicate(c, log);
  EXPECT_EQ(slurp(a / "table.csv"), slurp(b / "table.csv"));
}

TEST(Replicate, FailedCellIsRecordedAndRunContinues) {
  const fs::path dir = scratch("fail");
  RunConfig c = quick(dir);
  c.replicate = ReplicateGrid{{1, 30}, {5}, {0.2}, {0.999}, {DataLaw::Gaussian}, 1};
  std::ostringstream log;
  EXPECT_EQ(cmd_replicate(c, log), 1);
  const std::string table = slurp(dir / "table.csv");
  EXPECT_NE(table.find(",failed\n"), std::string::npos);
  EXPECT_NE(table.find(",ok\n"), std::string::npos);
}

TEST(RateProbeCommand, WritesRows) {
  const fs::path dir = scratch("rate");
  RunConfig c = quick(dir);
  c.rate.p = 8;
  c.rate.n_grid = {40, 80};
  c.rate.replicates = 2;
  c.rate.draws = 2;
  std::ostringstream log;
  ASSERT_EQ(cmd_rate_probe(c, log), 0);
  EXPECT_EQ(count_lines(dir / "rate.csv"), 3);
}

TEST(Executable, ExitCodesFollowErrors) {
  const fs::path dir = scratch("exe");
  EXPECT_EQ(run_cli("simulate --p 6 --n 20 --seed 1 --out " + (dir / "sim").string(), dir / "a.txt"), 0);
  EXPECT_EQ(run_cli("fit --data " + (dir / "sim" / "data.csv").string() +
                        " --iterations 500 --burn-in 50 --workers 1 --out " + (dir / "fit").string(),
                    dir / "b.txt"),
            0);
  write_text(dir / "bad.csv", "1,2\n3,4\n5\n");
  EXPECT_NE(run_cli("fit --data " + (dir / "bad.csv").string() + " --out " + (dir / "x").string(), dir / "c.txt"), 0);
  EXPECT_NE(slurp(dir / "c.txt").find("bad.csv:3:"), std::string::npos);
  EXPECT_NE(run_cli("fit --out " + (dir / "x").string(), dir / "d.txt"), 0);
  EXPECT_NE(run_cli("simulate --alpha 2 --r-rule bogus", dir / "e.txt"), 0);

  EXPECT_EQ(run_cli("fit --print-config --alpha 0.8 --seed 3", dir / "cfg.json"), 0);
  EXPECT_EQ(run_cli("fit --print-config --config " + (dir / "cfg.json").string(), dir / "cfg2.json"), 0);
  EXPECT_EQ(slurp(dir / "cfg.json"), slurp(dir / "cfg2.json"));
}
