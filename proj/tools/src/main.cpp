#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "esc_dag_cli/commands.hpp"
#include "esc_dag_cli/config.hpp"

namespace {

using esc_dag::cli::RunConfig;

struct Overrides {
  std::string config_path;
  bool print_config = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::optional<double> alpha, gamma, c1, c2, threshold, sparsity;
  std::optional<long> iterations, burn_in;
  std::optional<std::string> r_rule, variant, data_law, init;
  std::optional<int> n, p, draws, replicates;
  std::optional<std::string> data, truth, inclusion;
  bool standardize = false;
};

void add_common(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  cmd.add_flag("--print-config", o.print_config, "Print the effective configuration and exit");
  cmd.add_option("--seed", o.seed, "Master seed");
  cmd.add_option("--workers", o.workers, "Worker threads (fallback: ESC_DAG_WORKERS)")->check(CLI::PositiveNumber);
  cmd.add_option("--out", o.out, "Output directory");
  cmd.add_option("--alpha", o.alpha, "Likelihood fraction");
  cmd.add_option("--gamma", o.gamma, "Prior precision scale");
  cmd.add_option("--c1", o.c1, "Model-size prior constant");
  cmd.add_option("--c2", o.c2, "Model-size prior exponent");
  cmd.add_option("--iterations", o.iterations, "Retained MCMC iterations");
  cmd.add_option("--burn-in", o.burn_in, "Burn-in iterations");
  cmd.add_option("--threshold", o.threshold, "Inclusion-probability selection threshold");
  cmd.add_option("--r-rule", o.r_rule, "Support cap rule")->check(CLI::IsMember({"condition_p", "order_cap", "explicit"}));
  cmd.add_option("--variant", o.variant, "Prior variant")->check(CLI::IsMember({"esc", "mesc"}));
  cmd.add_option("--data-law", o.data_law, "Simulated data law")->check(CLI::IsMember({"gaussian", "laplace"}));
  cmd.add_option("--init", o.init, "Chain initialization")->check(CLI::IsMember({"empty", "screening"}));
  cmd.add_option("--n", o.n, "Sample size");
  cmd.add_option("--p", o.p, "Number of variables");
  cmd.add_option("--sparsity", o.sparsity, "Fraction of nonzero lower-triangular entries");
  cmd.add_option("--replicates", o.replicates, "Replicates per cell");
}

RunConfig build_config(const std::string& command, const Overrides& o) {
  using namespace esc_dag::cli;
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (o.out) c.out = *o.out;
  if (o.alpha) c.hyper.alpha = *o.alpha;
  if (o.gamma) c.hyper.gamma = *o.gamma;
  if (o.c1) c.hyper.c1 = *o.c1;
  if (o.c2) c.hyper.c2 = *o.c2;
  if (o.iterations) c.chain.iterations = *o.iterations;
  if (o.burn_in) c.chain.burn_in = *o.burn_in;
  if (o.threshold) c.chain.threshold = *o.threshold;
  if (o.r_rule) c.hyper.r_rule = esc_dag::parse_r_rule(*o.r_rule);
  if (o.variant) c.hyper.variant = esc_dag::parse_variant(*o.variant);
  if (o.init) c.chain.init = parse_init(*o.init);
  if (o.data) c.io.data = *o.data;
  if (o.truth) c.io.truth = *o.truth;
  if (o.inclusion) c.io.inclusion = *o.inclusion;
  if (o.standardize) c.io.standardize = true;
  if (o.draws) c.io.draws = *o.draws;
  // Grid-shaped commands take the scalar overrides as single-value axes.
  if (command == "replicate") {
    if (o.n) c.replicate.n = {*o.n};
    if (o.p) c.replicate.p = {*o.p};
    if (o.sparsity) c.replicate.sparsity = {*o.sparsity};
    if (o.alpha) c.replicate.alpha = {*o.alpha};
    if (o.data_law) c.replicate.data_law = {parse_data_law(*o.data_law)};
    if (o.replicates) c.replicate.replicates = *o.replicates;
  } else if (command == "rate-probe") {
    if (o.p) c.rate.p = *o.p;
    if (o.sparsity) c.rate.sparsity = *o.sparsity;
    if (o.data_law) c.rate.data_law = parse_data_law(*o.data_law);
    if (o.replicates) c.rate.replicates = *o.replicates;
    if (o.draws) c.rate.draws = *o.draws;
  } else {
    if (o.n) c.n = *o.n;
    if (o.p) c.truth.p = *o.p;
    if (o.sparsity) c.truth.sparsity = *o.sparsity;
    if (o.data_law) c.data_law = parse_data_law(*o.data_law);
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian DAG structure learning via sparse Cholesky posteriors"};
  app.require_subcommand(1);
  Overrides o;

  auto* simulate = app.add_subcommand("simulate", "Draw a sparse truth and a data set");
  auto* fit = app.add_subcommand("fit", "Run the column samplers on a data CSV");
  auto* evaluate = app.add_subcommand("evaluate", "Score inclusion probabilities against a truth");
  auto* replicate = app.add_subcommand("replicate", "Replicate study over a grid of cells");
  auto* rate = app.add_subcommand("rate-probe", "Posterior error as n grows");
  for (auto* cmd : {simulate, fit, evaluate, replicate, rate}) add_common(*cmd, o);
  fit->add_option("--data", o.data, "Observations CSV (rows = observations)");
  fit->add_flag("--standardize", o.standardize, "Center and scale columns before fitting");
  fit->add_option("--draws", o.draws, "Posterior (A, D, Omega) draws to write");
  rate->add_option("--draws", o.draws, "Posterior draws per fit");
  evaluate->add_option("--truth", o.truth, "Directory with truth_A.csv and truth_D.csv");
  evaluate->add_option("--inclusion", o.inclusion, "Inclusion-probability triplets CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    const RunConfig config = build_config(command, o);
    if (o.print_config) {
      std::cout << esc_dag::cli::emit_config(config);
      return 0;
    }
    if (command == "simulate") return esc_dag::cli::cmd_simulate(config, std::cout);
    if (command == "fit") return esc_dag::cli::cmd_fit(config, std::cout);
    if (command == "evaluate") return esc_dag::cli::cmd_evaluate(config, std::cout);
    if (command == "replicate") return esc_dag::cli::cmd_replicate(config, std::cout);
    return esc_dag::cli::cmd_rate_probe(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "esc-dag: error: " << e.what() << '\n';
    return 1;
  }
}
